#include "ifslab/specio.hpp"

#include <cmath>
#include <cstdio>

#include "ifslab/io.hpp"
#include "json.hpp"

namespace ifslab::specio {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string &pointer, const std::string &msg) {
    throw ValidationError("spec schema error at " + pointer + ": " + msg);
}

double number_at(const json &j, const std::string &pointer) {
    if (!j.is_number()) schema_error(pointer, "expected a number");
    return j.get<double>();
}

} // namespace

IFSystem ifs_from_json(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_error("/", "expected an object");

    IFSystem ifs;

    if (!doc.contains("space") || !doc["space"].is_object())
        schema_error("/space", "expected an object");
    const json &space = doc["space"];
    if (!space.contains("dim") || !space["dim"].is_number_integer())
        schema_error("/space/dim", "expected an integer");
    const int dim = space["dim"].get<int>();
    if (dim < 1 || dim > 3) schema_error("/space/dim", "dim must be 1, 2 or 3");
    ifs.space.dim = dim;

    std::string variant = space.value("variant", std::string("euclidean"));
    if (variant == "euclidean")
        ifs.space.variant = SpaceVariant::euclidean;
    else if (variant == "circle")
        ifs.space.variant = SpaceVariant::circle;
    else
        schema_error("/space/variant", "expected \"euclidean\" or \"circle\"");

    if (!space.contains("bounds") || !space["bounds"].is_array() ||
        space["bounds"].size() != static_cast<size_t>(dim))
        schema_error("/space/bounds", "expected an array of dim [lo,hi] pairs");
    ifs.space.bounds.dim = dim;
    ifs.space.bounds.lo.dim = dim;
    ifs.space.bounds.hi.dim = dim;
    for (int i = 0; i < dim; ++i) {
        const json &b = space["bounds"][static_cast<size_t>(i)];
        const std::string ptr = "/space/bounds/" + std::to_string(i);
        if (!b.is_array() || b.size() != 2) schema_error(ptr, "expected [lo, hi]");
        const double lo = number_at(b[0], ptr + "/0");
        const double hi = number_at(b[1], ptr + "/1");
        if (!(lo < hi)) schema_error(ptr, "needs lo < hi");
        ifs.space.bounds.lo[i] = lo;
        ifs.space.bounds.hi[i] = hi;
    }

    if (!doc.contains("maps") || !doc["maps"].is_array() || doc["maps"].empty())
        schema_error("/maps", "expected a nonempty array");
    for (size_t mi = 0; mi < doc["maps"].size(); ++mi) {
        const json &m = doc["maps"][mi];
        const std::string ptr = "/maps/" + std::to_string(mi);
        if (!m.is_object() || !m.contains("type") || !m["type"].is_string())
            schema_error(ptr, "expected an object with a \"type\"");
        const std::string type = m["type"].get<std::string>();
        if (type == "affine") {
            if (!m.contains("matrix") || !m["matrix"].is_array() ||
                m["matrix"].size() != static_cast<size_t>(dim))
                schema_error(ptr + "/matrix", "expected dim rows");
            AffineMap a;
            a.dim = dim;
            for (int r = 0; r < dim; ++r) {
                const json &row = m["matrix"][static_cast<size_t>(r)];
                if (!row.is_array() || row.size() != static_cast<size_t>(dim))
                    schema_error(ptr + "/matrix/" + std::to_string(r), "expected dim entries");
                for (int c = 0; c < dim; ++c)
                    a.m[static_cast<size_t>(r * dim + c)] = number_at(
                        row[static_cast<size_t>(c)],
                        ptr + "/matrix/" + std::to_string(r) + "/" + std::to_string(c));
            }
            if (!m.contains("offset") || !m["offset"].is_array() ||
                m["offset"].size() != static_cast<size_t>(dim))
                schema_error(ptr + "/offset", "expected dim entries");
            a.offset.dim = dim;
            for (int c = 0; c < dim; ++c)
                a.offset[c] = number_at(m["offset"][static_cast<size_t>(c)],
                                        ptr + "/offset/" + std::to_string(c));
            ifs.maps.push_back(MapSpec::make_affine(a));
        } else if (type == "expr") {
            if (!m.contains("exprs") || !m["exprs"].is_array() ||
                m["exprs"].size() != static_cast<size_t>(dim))
                schema_error(ptr + "/exprs", "expected dim expression strings");
            std::vector<std::string> sources;
            for (size_t e = 0; e < m["exprs"].size(); ++e) {
                if (!m["exprs"][e].is_string())
                    schema_error(ptr + "/exprs/" + std::to_string(e), "expected a string");
                sources.push_back(m["exprs"][e].get<std::string>());
            }
            try {
                ifs.maps.push_back(MapSpec::make_expr(dim, sources));
            } catch (const expr::ParseError &pe) {
                schema_error(ptr + "/exprs",
                             std::string(pe.what()) + " (byte " + std::to_string(pe.offset) +
                                 ", expected " + pe.expected + ")");
            }
        } else if (type == "builtin") {
            if (!m.contains("name") || !m["name"].is_string())
                schema_error(ptr + "/name", "expected a builtin name");
            const std::string name = m["name"].get<std::string>();
            if (name == "identity") {
                ifs.maps.push_back(MapSpec::make_builtin(BuiltinKind::identity));
            } else if (name == "circle-rotation") {
                if (!m.contains("params") || !m["params"].is_object() ||
                    !m["params"].contains("r"))
                    schema_error(ptr + "/params/r", "circle-rotation needs parameter r");
                ifs.maps.push_back(MapSpec::make_builtin(
                    BuiltinKind::circle_rotation, number_at(m["params"]["r"], ptr + "/params/r")));
            } else {
                schema_error(ptr + "/name", "unknown builtin '" + name + "'");
            }
            if (ifs.space.variant != SpaceVariant::circle && name == "circle-rotation")
                schema_error(ptr, "circle-rotation needs the circle space variant");
        } else {
            schema_error(ptr + "/type", "expected \"affine\", \"expr\" or \"builtin\"");
        }
    }

    if (doc.contains("weights")) {
        if (!doc["weights"].is_array() || doc["weights"].size() != doc["maps"].size())
            schema_error("/weights", "expected one weight per map");
        double sum = 0.0;
        for (size_t i = 0; i < doc["weights"].size(); ++i) {
            const double w = number_at(doc["weights"][i], "/weights/" + std::to_string(i));
            if (w <= 0.0) schema_error("/weights/" + std::to_string(i), "weights must be positive");
            ifs.weights.push_back(w);
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-12) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "weights sum %.17g", sum);
            schema_error("/weights", buf);
        }
    }

    ifs.validate();
    return ifs;
}

IFSystem load_ifs(const std::string &path) { return ifs_from_json(io::read_file(path)); }

std::string ifs_to_json(const IFSystem &ifs) {
    io::Json doc;
    io::Json space;
    space["dim"] = ifs.space.dim;
    space["variant"] = ifs.space.variant == SpaceVariant::circle ? "circle" : "euclidean";
    io::Json bounds{io::Json::Array{}};
    for (int i = 0; i < ifs.space.dim; ++i) {
        io::Json pair{io::Json::Array{}};
        pair.push_back(ifs.space.bounds.lo[i]);
        pair.push_back(ifs.space.bounds.hi[i]);
        bounds.push_back(std::move(pair));
    }
    space["bounds"] = std::move(bounds);
    doc["space"] = std::move(space);

    io::Json maps{io::Json::Array{}};
    for (const auto &m : ifs.maps) {
        io::Json jm;
        switch (m.kind) {
            case MapSpec::Kind::affine: {
                jm["type"] = "affine";
                io::Json matrix{io::Json::Array{}};
                for (int r = 0; r < m.dim; ++r) {
                    io::Json row{io::Json::Array{}};
                    for (int c = 0; c < m.dim; ++c)
                        row.push_back(m.affine.m[static_cast<size_t>(r * m.dim + c)]);
                    matrix.push_back(std::move(row));
                }
                jm["matrix"] = std::move(matrix);
                io::Json off{io::Json::Array{}};
                for (int c = 0; c < m.dim; ++c) off.push_back(m.affine.offset[c]);
                jm["offset"] = std::move(off);
                break;
            }
            case MapSpec::Kind::expr: {
                jm["type"] = "expr";
                io::Json ex{io::Json::Array{}};
                for (const auto &e : m.coords) ex.push_back(e.print());
                jm["exprs"] = std::move(ex);
                break;
            }
            case MapSpec::Kind::builtin: {
                jm["type"] = "builtin";
                jm["name"] =
                    m.builtin == BuiltinKind::identity ? "identity" : "circle-rotation";
                if (m.builtin == BuiltinKind::circle_rotation) {
                    io::Json params;
                    params["r"] = m.param;
                    jm["params"] = std::move(params);
                }
                break;
            }
        }
        maps.push_back(std::move(jm));
    }
    doc["maps"] = std::move(maps);
    if (ifs.has_weights()) {
        io::Json w{io::Json::Array{}};
        for (double p : ifs.weights) w.push_back(p);
        doc["weights"] = std::move(w);
    }
    return doc.dump();
}

} // namespace ifslab::specio

namespace ifslab::gallery {

namespace {

const char *kCantor = R"json({
  "space": {"dim": 1, "bounds": [[0.0, 1.0]], "variant": "euclidean"},
  "maps": [
    {"type": "affine", "matrix": [[0.3333333333333333]], "offset": [0.0]},
    {"type": "affine", "matrix": [[0.3333333333333333]], "offset": [0.6666666666666666]}
  ],
  "weights": [0.5, 0.5]
}
)json";

const char *kSierpinski = R"json({
  "space": {"dim": 2, "bounds": [[0.0, 1.0], [0.0, 0.8660254037844386]], "variant": "euclidean"},
  "maps": [
    {"type": "affine", "matrix": [[0.5, 0.0], [0.0, 0.5]], "offset": [0.0, 0.0]},
    {"type": "affine", "matrix": [[0.5, 0.0], [0.0, 0.5]], "offset": [0.5, 0.0]},
    {"type": "affine", "matrix": [[0.5, 0.0], [0.0, 0.5]], "offset": [0.25, 0.4330127018922193]}
  ],
  "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334]
}
)json";

const char *kTarafdar = R"json({
  "space": {"dim": 1, "bounds": [[0.0, 1.0]], "variant": "euclidean"},
  "maps": [
    {"type": "expr", "exprs": ["max(0.5, 1-x)"]},
    {"type": "expr", "exprs": ["min(0.5, 1-x)"]}
  ],
  "weights": [0.5, 0.5]
}
)json";

const char *kSinAverage = R"json({
  "space": {"dim": 1, "bounds": [[0.0, 1.5707963267948966]], "variant": "euclidean"},
  "maps": [
    {"type": "expr", "exprs": ["2*sin(x)"]},
    {"type": "expr", "exprs": ["0.5*sin(x)"]}
  ],
  "weights": [0.3333333333333333, 0.6666666666666667]
}
)json";

const char *kSemiattractor = R"json({
  "space": {"dim": 1, "bounds": [[-1.0, 1.0]], "variant": "euclidean"},
  "maps": [
    {"type": "affine", "matrix": [[0.5]], "offset": [0.0]},
    {"type": "affine", "matrix": [[2.0]], "offset": [0.0]}
  ],
  "weights": [0.75, 0.25]
}
)json";

const char *kCircleRotation = R"json({
  "space": {"dim": 1, "bounds": [[0.0, 1.0]], "variant": "circle"},
  "maps": [
    {"type": "builtin", "name": "circle-rotation", "params": {"r": 0.41421356237309515}},
    {"type": "builtin", "name": "identity"}
  ],
  "weights": [0.5, 0.5]
}
)json";

const char *kEventual2d = R"json({
  "space": {"dim": 2, "bounds": [[0.0, 1.0], [0.0, 1.0]], "variant": "euclidean"},
  "maps": [
    {"type": "affine", "matrix": [[0.0, 1.0], [0.5, 0.0]], "offset": [0.0, 0.0]},
    {"type": "affine", "matrix": [[0.0, 1.0], [0.5, 0.0]], "offset": [0.0, 0.5]}
  ],
  "weights": [0.5, 0.5]
}
)json";

const std::vector<Entry> kEntries = {
    {"cantor", "middle-third Cantor system {x/3, x/3 + 2/3} on [0,1]", kCantor},
    {"sierpinski", "three half-scale corner maps of the Sierpinski triangle", kSierpinski},
    {"tarafdar", "two topological contractions with a continuum of invariant sets", kTarafdar},
    {"sin-average", "{2 sin x, sin(x)/2} on [0, pi/2]: average-Rakotch, not average contractive",
     kSinAverage},
    {"semiattractor", "{x/2, 2x}: invariant measure at 0 but no attractor", kSemiattractor},
    {"circle-rotation", "irrational rotation + identity on the circle", kCircleRotation},
    {"eventual-2d", "coordinate-swap system whose second iterate is contractive", kEventual2d},
};

} // namespace

const std::vector<Entry> &entries() { return kEntries; }

const Entry &find(const std::string &id) {
    for (const auto &e : kEntries)
        if (e.id == id) return e;
    throw ValidationError("unknown gallery id '" + id + "'");
}

IFSystem load(const std::string &id) { return specio::ifs_from_json(find(id).json); }

} // namespace ifslab::gallery
