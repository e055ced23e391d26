#include "ifslab/codespace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ifslab {

std::string Word::to_string() const {
    std::string out;
    for (size_t i = 0; i < symbols.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(symbols[i]);
    }
    return out;
}

BaireResult baire_distance(const Word &alpha, const Word &beta) {
    if (alpha.alphabet != beta.alphabet)
        throw ValidationError("baire_distance: alphabet mismatch (" +
                              std::to_string(alpha.alphabet) + " vs " +
                              std::to_string(beta.alphabet) + ")");
    BaireResult r;
    r.compared = std::min(alpha.symbols.size(), beta.symbols.size());
    for (size_t i = 0; i < r.compared; ++i) {
        if (alpha.symbols[i] != beta.symbols[i]) {
            // first differing index is 1-based: mismatch at i gives 2^{-(i+1)}
            r.distance = std::ldexp(1.0, -static_cast<int>(i + 1));
            return r;
        }
    }
    r.prefix_equal = true;
    r.distance = 0.0;
    return r;
}

Word champernowne(int N, size_t length) {
    if (N < 1) throw ValidationError("champernowne needs N >= 1");
    Word w;
    w.alphabet = N;
    w.symbols.reserve(length);
    for (size_t block = 1; w.symbols.size() < length; ++block) {
        // all words of length `block` in lexicographic order
        std::vector<int> word(block, 1);
        while (true) {
            for (int s : word) {
                if (w.symbols.size() >= length) return w;
                w.symbols.push_back(s);
            }
            size_t j = block;
            while (j > 0 && word[j - 1] == N) {
                word[j - 1] = 1;
                --j;
            }
            if (j == 0) break;
            ++word[j - 1];
        }
    }
    return w;
}

DisjunctiveReport is_disjunctive_upto(const Word &prefix, int k, size_t budget) {
    if (k < 1) throw ValidationError("is_disjunctive_upto needs k >= 1");
    const int N = prefix.alphabet;
    size_t nk = 1;
    for (int i = 0; i < k; ++i) {
        nk *= static_cast<size_t>(N);
        if (nk > budget)
            throw BudgetError("is_disjunctive_upto: N^k exceeds the enumeration budget");
    }

    DisjunctiveReport rep;
    rep.k = k;
    rep.ok = true;
    for (int len = 1; len <= k; ++len) {
        size_t count = 1;
        for (int i = 0; i < len; ++i) count *= static_cast<size_t>(N);
        std::vector<bool> seen(count, false);
        if (prefix.symbols.size() >= static_cast<size_t>(len)) {
            // rolling index over contiguous blocks of the prefix
            size_t idx = 0, pow = 1;
            for (int i = 0; i < len - 1; ++i) pow *= static_cast<size_t>(N);
            for (size_t i = 0; i < prefix.symbols.size(); ++i) {
                const size_t digit = static_cast<size_t>(prefix.symbols[i] - 1);
                if (i < static_cast<size_t>(len)) {
                    idx = idx * static_cast<size_t>(N) + digit;
                    if (i + 1 == static_cast<size_t>(len)) seen[idx] = true;
                } else {
                    idx = (idx % pow) * static_cast<size_t>(N) + digit;
                    seen[idx] = true;
                }
            }
        }
        for (size_t v = 0; v < count; ++v) {
            if (seen[v]) continue;
            rep.ok = false;
            if (rep.missing.size() < 10) {
                Word miss;
                miss.alphabet = N;
                miss.symbols.resize(static_cast<size_t>(len));
                size_t x = v;
                for (int i = len - 1; i >= 0; --i) {
                    miss.symbols[static_cast<size_t>(i)] = static_cast<int>(x % static_cast<size_t>(N)) + 1;
                    x /= static_cast<size_t>(N);
                }
                rep.missing.push_back(std::move(miss));
            }
        }
    }
    return rep;
}

MinorantVerdict minorant_verdict(MinorantFamily family, double param) {
    MinorantVerdict v;
    v.family = family;
    v.param = param;
    // p_n const and p_n = (log n)^{-b} satisfy p_n^{-1}/n^c -> 0 for every
    // c > 0; p_n = n^{-b} and p_n = sin(n^{-b}) do not.
    v.satisfies = family == MinorantFamily::constant || family == MinorantFamily::logpow;

    auto p_of = [&](double n) -> double {
        switch (family) {
            case MinorantFamily::constant: return param;
            case MinorantFamily::logpow: return std::pow(std::log(n), -param);
            case MinorantFamily::pow: return std::pow(n, -param);
            case MinorantFamily::sinpow: return std::sin(std::pow(n, -param));
        }
        return param;
    };
    for (double c : {0.5, 1.0, 2.0})
        for (double n : {1e2, 1e4, 1e6})
            v.table.push_back({c, n, 1.0 / (p_of(n) * std::pow(n, c))});
    return v;
}

Driver::Driver(const DriverSpec &spec) : spec_(spec), rng_(spec.seed) {
    if (spec_.N < 1) throw ValidationError("driver alphabet must be >= 1");
    switch (spec_.kind) {
        case DriverSpec::Kind::periodic:
        case DriverSpec::Kind::explicit_prefix:
            if (spec_.pattern.symbols.empty())
                throw ValidationError("periodic/explicit driver needs a nonempty word");
            for (int s : spec_.pattern.symbols)
                if (s < 1 || s > spec_.N) throw ValidationError("driver word symbol out of range");
            break;
        case DriverSpec::Kind::bernoulli: {
            if (spec_.weights.empty()) spec_.weights.assign(static_cast<size_t>(spec_.N), 1.0 / spec_.N);
            if (static_cast<int>(spec_.weights.size()) != spec_.N)
                throw ValidationError("bernoulli driver needs N weights");
            double sum = 0.0;
            for (double w : spec_.weights) {
                if (w < 0.0) throw ValidationError("bernoulli weights must be nonnegative");
                sum += w;
            }
            if (std::fabs(sum - 1.0) > 1e-9)
                throw ValidationError("bernoulli weights must sum to 1");
            break;
        }
        case DriverSpec::Kind::markov: {
            if (static_cast<int>(spec_.rows.size()) != spec_.N)
                throw ValidationError("markov driver needs N transition rows");
            for (const auto &row : spec_.rows) {
                if (static_cast<int>(row.size()) != spec_.N)
                    throw ValidationError("markov transition rows must have N entries");
                double sum = 0.0;
                for (double w : row) sum += w;
                if (std::fabs(sum - 1.0) > 1e-9)
                    throw ValidationError("markov transition rows must sum to 1");
            }
            if (spec_.init.empty()) spec_.init.assign(static_cast<size_t>(spec_.N), 1.0 / spec_.N);
            if (static_cast<int>(spec_.init.size()) != spec_.N)
                throw ValidationError("markov initial distribution needs N entries");
            break;
        }
        default: break;
    }
}

int Driver::next() {
    switch (spec_.kind) {
        case DriverSpec::Kind::champernowne: {
            // regenerate lazily in blocks: symbol at position pos_ of the
            // Champernowne stream
            if (cham_cache_.symbols.size() <= pos_) {
                const size_t want = std::max<size_t>(1024, (pos_ + 1) * 2);
                cham_cache_ = champernowne(spec_.N, want);
            }
            return cham_cache_.symbols[pos_++];
        }
        case DriverSpec::Kind::periodic:
            return spec_.pattern.symbols[pos_++ % spec_.pattern.symbols.size()];
        case DriverSpec::Kind::explicit_prefix:
            if (pos_ >= spec_.pattern.symbols.size())
                throw NumericError("explicit driver exhausted after " +
                                   std::to_string(spec_.pattern.symbols.size()) + " symbols");
            return spec_.pattern.symbols[pos_++];
        case DriverSpec::Kind::bernoulli:
            ++pos_;
            return rng_.categorical(spec_.weights) + 1;
        case DriverSpec::Kind::markov: {
            if (state_ == 0)
                state_ = rng_.categorical(spec_.init) + 1;
            else
                state_ = rng_.categorical(spec_.rows[static_cast<size_t>(state_ - 1)]) + 1;
            ++pos_;
            return state_;
        }
        case DriverSpec::Kind::minorant: {
            // canonical process with minorant p_n: with probability N*p_n the
            // symbol is uniform, otherwise it is 1; then
            // Pr(Z_n = s | history) >= p_n for every s
            const double n = static_cast<double>(++pos_);
            double p;
            switch (spec_.family) {
                case MinorantFamily::constant: p = spec_.family_param; break;
                case MinorantFamily::logpow:
                    p = n > 1.0 ? std::pow(std::log(n), -spec_.family_param) : 1.0;
                    break;
                case MinorantFamily::pow: p = std::pow(n, -spec_.family_param); break;
                case MinorantFamily::sinpow: p = std::sin(std::pow(n, -spec_.family_param)); break;
                default: p = spec_.family_param;
            }
            p = std::clamp(p, 0.0, 1.0 / spec_.N);
            const double u = rng_.uniform01();
            if (u < spec_.N * p) return static_cast<int>(rng_.index(static_cast<size_t>(spec_.N))) + 1;
            return 1;
        }
    }
    throw ValidationError("bad driver kind");
}

Driver Driver::clone_with_seed(uint64_t seed) const {
    DriverSpec s = spec_;
    s.seed = seed;
    return Driver(s);
}

DriverSpec parse_driver_spec(const std::string &text, int N, uint64_t seed) {
    DriverSpec spec;
    spec.N = N;
    spec.seed = seed;
    const auto colon = text.find(':');
    const std::string head = colon == std::string::npos ? text : text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (head == "champernowne") {
        spec.kind = DriverSpec::Kind::champernowne;
    } else if (head == "periodic" || head == "explicit") {
        spec.kind = head == "periodic" ? DriverSpec::Kind::periodic
                                       : DriverSpec::Kind::explicit_prefix;
        spec.pattern.alphabet = N;
        std::stringstream ss(arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            spec.pattern.symbols.push_back(std::stoi(tok));
        }
        if (spec.pattern.symbols.empty())
            throw ValidationError("driver '" + head + "' needs a pattern, e.g. periodic:1,2");
    } else if (head == "bernoulli") {
        spec.kind = DriverSpec::Kind::bernoulli;
        if (!arg.empty()) {
            std::stringstream ss(arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) spec.weights.push_back(std::stod(tok));
        }
    } else if (head == "markov") {
        // markov:PATH with a JSON document {"rows": [[..]], "init": [..]}
        spec.kind = DriverSpec::Kind::markov;
        std::ifstream f(arg);
        if (!f) throw ValidationError("cannot read markov driver file '" + arg + "'");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error &e) {
            throw ValidationError("markov driver file is not valid JSON: " + std::string(e.what()));
        }
        if (!doc.contains("rows") || !doc["rows"].is_array())
            throw ValidationError("markov driver file needs a \"rows\" array");
        for (const auto &row : doc["rows"]) {
            std::vector<double> r;
            for (const auto &x : row) r.push_back(x.get<double>());
            spec.rows.push_back(std::move(r));
        }
        if (doc.contains("init"))
            for (const auto &x : doc["init"]) spec.init.push_back(x.get<double>());
    } else if (head == "minorant") {
        spec.kind = DriverSpec::Kind::minorant;
        // minorant:FAMILY[,PARAM], families const | logpow | pow | sinpow
        std::stringstream ss(arg);
        std::string fam, par;
        std::getline(ss, fam, ',');
        std::getline(ss, par, ',');
        if (fam == "const")
            spec.family = MinorantFamily::constant;
        else if (fam == "logpow")
            spec.family = MinorantFamily::logpow;
        else if (fam == "pow")
            spec.family = MinorantFamily::pow;
        else if (fam == "sinpow")
            spec.family = MinorantFamily::sinpow;
        else
            throw ValidationError("unknown minorant family '" + fam + "'");
        spec.family_param = par.empty() ? (spec.family == MinorantFamily::constant ? 0.3 : 1.0)
                                        : std::stod(par);
    } else {
        throw ValidationError("unknown driver '" + text + "'");
    }
    return spec;
}

CodingResult coding_point(const IFSystem &ifs, const Word &alpha, const Vec &base,
                          const ComparisonFunction *phi) {
    if (alpha.symbols.empty()) throw ValidationError("coding_point needs a nonempty word");
    if (!ifs.space.bounds.contains(base, 1e-9))
        throw ValidationError("coding_point base must lie in the domain box");
    CodingResult r;
    const ComposedMap cm = compose_word(ifs, alpha.symbols);
    r.point = cm(base);
    if (phi) {
        r.has_bound = true;
        r.error_bound =
            iterate_modulus(*phi, space_diameter(ifs.space), static_cast<int>(alpha.symbols.size()));
    }
    return r;
}

PointCloud williams_points(const IFSystem &ifs, int k_max, double tol, size_t word_budget,
                           int picard_max_iter) {
    ifs.validate();
    if (k_max < 1) throw ValidationError("williams_points needs k_max >= 1");
    const int N = ifs.size();
    size_t total = 0, level = 1;
    for (int k = 1; k <= k_max; ++k) {
        level *= static_cast<size_t>(N);
        total += level;
        if (total > word_budget)
            throw BudgetError("williams_points word budget exceeded at length " + std::to_string(k));
    }

    const Vec x0 = ifs.space.bounds.center();
    std::vector<Vec> fixed;
    fixed.reserve(total);
    // Picard runs well below tol so that repeated fixed points (w_alpha and
    // w_alphaalpha share theirs) land inside the dedup radius.
    const double picard_tol = tol / 20.0;
    std::vector<int> word;
    for (int k = 1; k <= k_max; ++k) {
        word.assign(static_cast<size_t>(k), 1);
        while (true) {
            const ComposedMap cm = compose_word(ifs, word);
            const PicardResult pr = picard_fixed_point(
                ifs.space, [&](const Vec &x) { return cm(x); }, x0, picard_tol, picard_max_iter);
            if (!pr.converged) {
                Word w;
                w.alphabet = N;
                w.symbols = word;
                throw NumericError("Picard iteration did not converge for word (" + w.to_string() +
                                   "); the system is likely not weakly contractive");
            }
            fixed.push_back(pr.point);
            int j = k - 1;
            while (j >= 0 && word[static_cast<size_t>(j)] == N) {
                word[static_cast<size_t>(j)] = 1;
                --j;
            }
            if (j < 0) break;
            ++word[static_cast<size_t>(j)];
        }
    }
    return PointCloud::build(ifs.space, std::move(fixed), tol);
}

} // namespace ifslab
