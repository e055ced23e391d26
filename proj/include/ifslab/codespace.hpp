#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ifslab/hyperspace.hpp"
#include "ifslab/mapkit.hpp"

namespace ifslab {

// Finite word over the alphabet {1..N}; the empty word is the identity
// composition.
struct Word {
    std::vector<int> symbols;
    int alphabet = 1;

    size_t length() const { return symbols.size(); }
    std::string to_string() const; // comma-separated symbols
};

struct BaireResult {
    double distance = 0.0;
    bool prefix_equal = false; // no difference found within the compared length
    size_t compared = 0;
};

// 2^{-m} with m the first differing index, 1-based. Words are compared on
// their common prefix length; equality within it sets the prefix_equal flag.
BaireResult baire_distance(const Word &alpha, const Word &beta);

// All 1-letter words, then all 2-letter words in lexicographic order, and so
// on, concatenated; returns a prefix of the given length.
Word champernowne(int N, size_t length);

struct DisjunctiveReport {
    bool ok = false;
    int k = 0;
    std::vector<Word> missing; // up to 10 witnesses, shortest first
};

DisjunctiveReport is_disjunctive_upto(const Word &prefix, int k, size_t budget = 1000000);

enum class MinorantFamily { constant, logpow, pow, sinpow };

struct MinorantVerdict {
    bool satisfies = false;
    MinorantFamily family{};
    double param = 0.0;
    struct Row {
        double c;
        double n;
        double value; // p_n^{-1} / n^c
    };
    std::vector<Row> table;
};

// Analytic verdict for the closed-form minorant families, plus a numeric
// illustration of p_n^{-1}/n^c.
MinorantVerdict minorant_verdict(MinorantFamily family, double param);

struct DriverSpec {
    enum class Kind { champernowne, periodic, explicit_prefix, bernoulli, markov, minorant };
    Kind kind = Kind::champernowne;
    int N = 2;
    Word pattern;                         // periodic / explicit
    std::vector<double> weights;          // bernoulli
    std::vector<std::vector<double>> rows; // markov transition rows
    std::vector<double> init;             // markov initial distribution (default uniform)
    MinorantFamily family = MinorantFamily::constant;
    double family_param = 0.3;
    uint64_t seed = 0;
};

// Stateful symbol source; single consumer. clone_with_seed builds an
// independent replica for parallel trials.
class Driver {
  public:
    explicit Driver(const DriverSpec &spec);
    int next(); // 1..N; throws NumericError when an explicit prefix runs out
    int alphabet() const { return spec_.N; }
    const DriverSpec &spec() const { return spec_; }
    Driver clone_with_seed(uint64_t seed) const;

  private:
    DriverSpec spec_;
    size_t pos_ = 0;
    int state_ = 0; // markov current symbol, 0 = undrawn
    Word cham_cache_;
    Rng rng_;
};

DriverSpec parse_driver_spec(const std::string &text, int N, uint64_t seed);

struct CodingResult {
    Vec point;
    double error_bound = 0.0;
    bool has_bound = false;
};

// w_{alpha|k}(base) for k = |alpha|; with a modulus phi the result is within
// phi^k(diam(domain)) of pi(alpha^anything).
CodingResult coding_point(const IFSystem &ifs, const Word &alpha, const Vec &base,
                          const ComparisonFunction *phi = nullptr);

// Picard fixed points of w_alpha over all nonempty words |alpha| <= k_max,
// deduplicated at resolution tol.
PointCloud williams_points(const IFSystem &ifs, int k_max, double tol,
                           size_t word_budget = 100000, int picard_max_iter = 100000);

} // namespace ifslab
