#include "ifslab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ifslab::io {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::vector<double>> parse_csv_rows(const std::string &text) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            if (cell.empty()) continue;
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception &) {
                throw ValidationError("CSV cell '" + cell + "' is not a number");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

std::string cloud_to_csv(const PointCloud &cloud, int dim) {
    std::string out;
    for (const auto &p : cloud.points) {
        for (int c = 0; c < dim; ++c) {
            if (c) out += ",";
            out += fmt17(p[c]);
        }
        out += "\n";
    }
    return out;
}

PointCloud cloud_from_csv(const Space &sp, const std::string &text) {
    const auto rows = parse_csv_rows(text);
    if (rows.empty()) throw ValidationError("CSV cloud is empty");
    std::vector<Vec> pts;
    for (const auto &row : rows) {
        if (static_cast<int>(row.size()) != sp.dim)
            throw ValidationError("CSV row has " + std::to_string(row.size()) +
                                  " columns, expected " + std::to_string(sp.dim));
        Vec p;
        p.dim = sp.dim;
        for (int c = 0; c < sp.dim; ++c) p[c] = row[static_cast<size_t>(c)];
        pts.push_back(p);
    }
    return PointCloud::build(sp, std::move(pts), 0.0);
}

std::string measure_to_csv(const DiscreteMeasure &mu, int dim) {
    std::string out;
    for (size_t i = 0; i < mu.size(); ++i) {
        out += fmt17(mu.weights[i]);
        for (int c = 0; c < dim; ++c) {
            out += ",";
            out += fmt17(mu.atoms[i][c]);
        }
        out += "\n";
    }
    return out;
}

DiscreteMeasure measure_from_csv(const Space &sp, const std::string &text) {
    const auto rows = parse_csv_rows(text);
    if (rows.empty()) throw ValidationError("CSV measure is empty");
    std::vector<Vec> atoms;
    std::vector<double> weights;
    for (const auto &row : rows) {
        if (static_cast<int>(row.size()) != sp.dim + 1)
            throw ValidationError("CSV measure row needs weight plus " + std::to_string(sp.dim) +
                                  " coordinates");
        weights.push_back(row[0]);
        Vec p;
        p.dim = sp.dim;
        for (int c = 0; c < sp.dim; ++c) p[c] = row[static_cast<size_t>(c + 1)];
        atoms.push_back(p);
    }
    return DiscreteMeasure::build(sp, std::move(atoms), std::move(weights), 0.0);
}

std::string plan_to_csv(const TransportPlan &plan) {
    std::string out;
    for (const auto &e : plan.entries) {
        out += std::to_string(e.src);
        out += ",";
        out += std::to_string(e.dst);
        out += ",";
        out += fmt17(e.mass);
        out += "\n";
    }
    return out;
}

std::string orbit_to_csv(const std::vector<long> &indices, const std::vector<Vec> &points,
                         int dim) {
    std::string out;
    for (size_t i = 0; i < indices.size(); ++i) {
        out += std::to_string(indices[i]);
        for (int c = 0; c < dim; ++c) {
            out += ",";
            out += fmt17(points[i][c]);
        }
        out += "\n";
    }
    return out;
}

namespace {

// floor rasterization with the y axis flipped; 1-D points go on the middle row
bool rasterize(const Vec &p, int width, int height, const Box &bbox, int dim, int &px, int &py) {
    const double wx = bbox.hi[0] - bbox.lo[0];
    if (wx <= 0.0) return false;
    const double fx = (p[0] - bbox.lo[0]) / wx;
    if (fx < 0.0 || fx > 1.0) return false;
    px = std::min(width - 1, static_cast<int>(std::floor(fx * width)));
    if (dim == 1) {
        py = height / 2;
        return true;
    }
    const double wy = bbox.hi[1] - bbox.lo[1];
    if (wy <= 0.0) return false;
    const double fy = (p[1] - bbox.lo[1]) / wy;
    if (fy < 0.0 || fy > 1.0) return false;
    const int row_up = std::min(height - 1, static_cast<int>(std::floor(fy * height)));
    py = height - 1 - row_up;
    return true;
}

} // namespace

std::string render_pgm(const PointCloud &cloud, int width, int height, const Box &bbox) {
    if (width < 1 || height < 1) throw ValidationError("image needs width, height >= 1");
    if (cloud.points.empty()) throw ValidationError("cannot render an empty cloud");
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::string pixels(static_cast<size_t>(width) * static_cast<size_t>(height),
                       static_cast<char>(255));
    const int dim = bbox.dim;
    for (const auto &p : cloud.points) {
        int px, py;
        if (rasterize(p, width, height, bbox, dim, px, py))
            pixels[static_cast<size_t>(py) * static_cast<size_t>(width) +
                   static_cast<size_t>(px)] = 0;
    }
    return header + pixels;
}

std::string render_ppm_orbit(const std::vector<Vec> &points, const std::vector<int> &symbols,
                             int width, int height, const Box &bbox, int dim) {
    if (width < 1 || height < 1) throw ValidationError("image needs width, height >= 1");
    static const unsigned char palette[][3] = {
        {230, 57, 70}, {29, 53, 87}, {42, 157, 143}, {233, 196, 106},
        {138, 90, 190}, {96, 108, 56}, {244, 162, 97}, {69, 123, 157}};
    std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::string pixels(static_cast<size_t>(width) * static_cast<size_t>(height) * 3,
                       static_cast<char>(255));
    for (size_t i = 0; i < points.size(); ++i) {
        int px, py;
        if (!rasterize(points[i], width, height, bbox, dim, px, py)) continue;
        const int sym = i < symbols.size() ? symbols[i] : 1;
        const auto &col = palette[static_cast<size_t>((sym - 1) % 8)];
        const size_t at =
            (static_cast<size_t>(py) * static_cast<size_t>(width) + static_cast<size_t>(px)) * 3;
        pixels[at] = static_cast<char>(col[0]);
        pixels[at + 1] = static_cast<char>(col[1]);
        pixels[at + 2] = static_cast<char>(col[2]);
    }
    return header + pixels;
}

Json &Json::operator[](const std::string &key) {
    if (!std::holds_alternative<Object>(v_)) v_ = Object{};
    return std::get<Object>(v_)[key];
}

void Json::push_back(Json j) {
    if (!std::holds_alternative<Array>(v_)) v_ = Array{};
    std::get<Array>(v_).push_back(std::move(j));
}

void Json::dump_to(std::string &out) const {
    struct V {
        std::string &out;
        void operator()(std::nullptr_t) { out += "null"; }
        void operator()(bool b) { out += b ? "true" : "false"; }
        void operator()(double d) {
            if (std::isfinite(d))
                out += fmt17(d);
            else
                out += d > 0 ? "\"inf\"" : (d < 0 ? "\"-inf\"" : "\"nan\"");
        }
        void operator()(long long i) { out += std::to_string(i); }
        void operator()(const std::string &s) {
            out += '"';
            for (char c : s) {
                switch (c) {
                    case '"': out += "\\\""; break;
                    case '\\': out += "\\\\"; break;
                    case '\n': out += "\\n"; break;
                    case '\t': out += "\\t"; break;
                    case '\r': out += "\\r"; break;
                    default:
                        if (static_cast<unsigned char>(c) < 0x20) {
                            char buf[8];
                            std::snprintf(buf, sizeof buf, "\\u%04x", c);
                            out += buf;
                        } else {
                            out += c;
                        }
                }
            }
            out += '"';
        }
        void operator()(const Array &a) {
            out += '[';
            for (size_t i = 0; i < a.size(); ++i) {
                if (i) out += ',';
                a[i].dump_to(out);
            }
            out += ']';
        }
        void operator()(const Object &o) {
            out += '{';
            bool first = true;
            for (const auto &[k, v] : o) { // std::map iterates in sorted key order
                if (!first) out += ',';
                first = false;
                V{out}(k);
                out += ':';
                v.dump_to(out);
            }
            out += '}';
        }
    };
    std::visit(V{out}, v_);
}

std::string Json::dump() const {
    std::string out;
    dump_to(out);
    return out;
}

std::string digest_hex(const std::string &bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_file(const std::string &path, const std::string &bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NumericError("cannot open '" + path + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw NumericError("write failed for '" + path + "'");
}

std::string read_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace ifslab::io
