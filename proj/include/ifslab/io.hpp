#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ifslab/hyperspace.hpp"
#include "ifslab/measurekit.hpp"
#include "ifslab/transport.hpp"

namespace ifslab::io {

// ---- CSV (17 significant digits) ----
std::string cloud_to_csv(const PointCloud &cloud, int dim);
PointCloud cloud_from_csv(const Space &sp, const std::string &text);
std::string measure_to_csv(const DiscreteMeasure &mu, int dim);
DiscreteMeasure measure_from_csv(const Space &sp, const std::string &text);
std::string plan_to_csv(const TransportPlan &plan);
std::string orbit_to_csv(const std::vector<long> &indices, const std::vector<Vec> &points, int dim);

// ---- netpbm images ----
// Binary PGM (P5): black pixel where at least one point rasterizes (floor
// mapping, y axis flipped so larger y is up); 1-D clouds draw on the middle
// row.
std::string render_pgm(const PointCloud &cloud, int width, int height, const Box &bbox);
// Binary PPM (P6): chaos orbits colored by the map index driving each point.
std::string render_ppm_orbit(const std::vector<Vec> &points, const std::vector<int> &symbols,
                             int width, int height, const Box &bbox, int dim);

// ---- canonical JSON (sorted keys, %.17g doubles) ----
class Json {
  public:
    using Object = std::map<std::string, Json>;
    using Array = std::vector<Json>;

    Json() : v_(nullptr) {}
    Json(std::nullptr_t) : v_(nullptr) {}
    Json(bool b) : v_(b) {}
    Json(double d) : v_(d) {}
    Json(long long i) : v_(i) {}
    Json(int i) : v_(static_cast<long long>(i)) {}
    Json(long i) : v_(static_cast<long long>(i)) {}
    Json(size_t i) : v_(static_cast<long long>(i)) {}
    Json(const char *s) : v_(std::string(s)) {}
    Json(std::string s) : v_(std::move(s)) {}
    Json(Array a) : v_(std::move(a)) {}
    Json(Object o) : v_(std::move(o)) {}

    Json &operator[](const std::string &key);
    void push_back(Json j);

    std::string dump() const; // canonical bytes, no trailing newline

  private:
    std::variant<std::nullptr_t, bool, double, long long, std::string, Array, Object> v_;
    void dump_to(std::string &out) const;
};

// FNV-1a 64-bit, hex string; used for the inputs digest in run reports.
std::string digest_hex(const std::string &bytes);

void write_file(const std::string &path, const std::string &bytes);
std::string read_file(const std::string &path);

} // namespace ifslab::io
