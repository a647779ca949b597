#include "runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "dirac.hpp"
#include "potential.hpp"

namespace gkpot {

using nlohmann::json;

const char* library_version() { return "0.1.0"; }

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::config, where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw Error(ErrorCode::config, where + ": unknown key '" + it.key() + "'");
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) throw Error(ErrorCode::config, where + ": expected a number");
    return j.get<double>();
}

double num_or(const json& obj, const char* key, double dflt, const std::string& where) {
    return obj.contains(key) ? num(obj.at(key), where + "." + key) : dflt;
}

bool bool_or(const json& obj, const char* key, bool dflt, const std::string& where) {
    if (!obj.contains(key)) return dflt;
    if (!obj.at(key).is_boolean()) throw Error(ErrorCode::config, where + "." + key + ": expected a boolean");
    return obj.at(key).get<bool>();
}

std::vector<double> num_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(ErrorCode::config, where + ": expected an array");
    std::vector<double> v;
    for (auto& x : j) v.push_back(num(x, where));
    return v;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Mat matrix(const json& j, int rows, int cols, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) throw Error(ErrorCode::config, where + ": bad matrix shape");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        auto row = num_list(j[r], where);
        if (static_cast<int>(row.size()) != cols) throw Error(ErrorCode::config, where + ": bad matrix shape");
        for (int c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void quaternionic(Mat& I, Mat& J, Mat& K) {
    I = jstd(2);
    J = Mat::Zero(4, 4);
    J(2, 0) = 1;
    J(3, 1) = -1;
    J(0, 2) = -1;
    J(1, 3) = 1;
    K = I * J;
}

CMat complex_matrix(const json& j, const std::string& where) {
    check_keys(j, {"re", "im"}, where);
    if (!j.contains("re") || !j.contains("im")) throw Error(ErrorCode::config, where + ": needs re and im");
    Mat re = matrix(j.at("re"), 4, 4, where + ".re"), im = matrix(j.at("im"), 4, 4, where + ".im");
    return re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>();
}

struct Tolerances {
    double star = 1e-8, flow_star = 1e-5, lemma = 1e-8, dirac = 1e-10, compare = 1e-9, boundary = 1e-3;
    bool require_positive = false;
    double max_escape_fraction = 0.0;
};

Tolerances tolerances(const RunConfig& cfg) {
    Tolerances t;
    if (!cfg.raw.contains("tolerances")) return t;
    const json& j = cfg.raw.at("tolerances");
    const std::string w = "tolerances";
    check_keys(j, {"star", "flow_star", "lemma", "dirac", "compare", "boundary", "require_positive", "max_escape_fraction"}, w);
    t.star = num_or(j, "star", t.star, w);
    t.flow_star = num_or(j, "flow_star", t.flow_star, w);
    t.lemma = num_or(j, "lemma", t.lemma, w);
    t.dirac = num_or(j, "dirac", t.dirac, w);
    t.compare = num_or(j, "compare", t.compare, w);
    t.boundary = num_or(j, "boundary", t.boundary, w);
    t.require_positive = bool_or(j, "require_positive", false, w);
    t.max_escape_fraction = num_or(j, "max_escape_fraction", 0.0, w);
    return t;
}

IntegratorConfig integrator(const RunConfig& cfg) {
    IntegratorConfig c;
    if (cfg.raw.contains("integrator")) {
        const json& j = cfg.raw.at("integrator");
        check_keys(j, {"steps", "step_tol", "quad_tol"}, "integrator");
        if (j.contains("steps")) {
            if (!j.at("steps").is_number_integer()) throw Error(ErrorCode::config, "integrator.steps: expected an integer");
            c.steps = j.at("steps").get<int>();
        }
        c.step_tol = num_or(j, "step_tol", c.step_tol, "integrator");
        c.quad_tol = num_or(j, "quad_tol", c.quad_tol, "integrator");
    }
    c.validate();
    return c;
}

// grid points followed by seeded random samples
std::vector<Vec> collect_points(const RunConfig& cfg, int dim) {
    std::vector<Vec> pts;
    if (cfg.raw.contains("grid")) {
        const json& g = cfg.raw.at("grid");
        check_keys(g, {"lo", "hi", "count"}, "grid");
        GridSpec gs;
        gs.lo = num_list(g.at("lo"), "grid.lo");
        gs.hi = num_list(g.at("hi"), "grid.hi");
        if (!g.contains("count") || !g.at("count").is_array()) throw Error(ErrorCode::config, "grid.count: expected an array");
        for (auto& c : g.at("count")) {
            if (!c.is_number_integer()) throw Error(ErrorCode::config, "grid.count: expected integers");
            gs.count.push_back(c.get<int>());
        }
        gs.validate();
        if (gs.dims() != dim) throw Error(ErrorCode::config, "grid: dimension differs from the chart");
        auto p = gs.points();
        pts.insert(pts.end(), p.begin(), p.end());
    }
    if (cfg.raw.contains("samples")) {
        const json& s = cfg.raw.at("samples");
        check_keys(s, {"count", "lo", "hi"}, "samples");
        if (!cfg.seed) throw Error(ErrorCode::config, "samples: a seed is mandatory for sampled points");
        if (!s.contains("count") || !s.at("count").is_number_integer() || s.at("count").get<int>() < 0)
            throw Error(ErrorCode::config, "samples.count: expected a non-negative integer");
        auto lo = num_list(s.at("lo"), "samples.lo"), hi = num_list(s.at("hi"), "samples.hi");
        if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
            throw Error(ErrorCode::config, "samples: dimension differs from the chart");
        std::mt19937_64 rng(*cfg.seed);
        const int count = s.at("count").get<int>();
        for (int k = 0; k < count; ++k) {
            Vec u(dim);
            for (int i = 0; i < dim; ++i) u(i) = lo[i] + (hi[i] - lo[i]) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
            pts.push_back(u);
        }
    }
    return pts;
}

json base_doc(const RunConfig& cfg, const std::string& command) {
    json d;
    d["schema_version"] = kReportSchemaVersion;
    d["command"] = command;
    std::string echo = cfg.raw.dump();
    d["config"] = echo;
    d["provenance"] = {{"config_hash", hex(fnv1a(echo))},
                       {"version", library_version()},
                       {"expression_grammar", kExpressionGrammarVersion}};
    d["provenance"]["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    return d;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string records_csv(const json& records, int dim) {
    std::ostringstream os;
    for (int i = 0; i < dim; ++i) os << "u" << (i + 1) << ",";
    os << "min_eig,star1,star2,ok\n";
    for (auto& r : records) {
        for (auto& c : r.at("coords")) os << fmt(c.get<double>()) << ",";
        auto val = [&](const char* k) { return r.contains(k) ? fmt(r.at(k).get<double>()) : std::string("nan"); };
        os << val("min_eig") << "," << val("star1") << "," << val("star2") << "," << (r.at("ok").get<bool>() ? 1 : 0)
           << "\n";
    }
    return os.str();
}

double lemma_residual(const DegenerateGKData& d, const Mat& g) {
    Mat Sp = -oneone_part(d.F, d.Iplus) * d.Iplus;
    Mat Sm = -oneone_part(d.F, d.Iminus) * d.Iminus;
    return std::max((Sp - g).cwiseAbs().maxCoeff(), (Sm - g).cwiseAbs().maxCoeff());
}

double dirac_residual(const DegenerateGKData& d) {
    CMat sp = holomorphic_poisson(d.Iplus, d.Q).sigma;
    CMat sm = holomorphic_poisson(d.Iminus, d.Q).sigma;
    DiracSubspace Lm = build_L_sigma(d.Iminus, sm), Lp = build_L_sigma(d.Iplus, sp);
    return subspace_distance(gauge(d.F.cast<cplx>(), Lm), Lp);
}

struct Scene {
    MoritaModel model;
    BraneBisection brane;
    DataField field;
    int dim = 0;
};

Scene build_scene(const RunConfig& cfg) {
    if (!cfg.raw.contains("model")) throw Error(ErrorCode::config, "config: model section is required");
    Scene s;
    s.model = build_model(cfg.raw.at("model"));
    s.brane = build_brane(cfg, s.model);
    s.dim = 2 * s.model.n;
    MoritaModel m = s.model;
    BraneBisection L = s.brane;
    s.field = [m, L](const Vec& u) { return induced_structures(m, L, u); };
    return s;
}

struct Checks {
    bool lemma = true, dirac = false;
};

Checks checks(const RunConfig& cfg) {
    Checks c;
    if (cfg.raw.contains("checks")) {
        const json& j = cfg.raw.at("checks");
        check_keys(j, {"lemma", "dirac"}, "checks");
        c.lemma = bool_or(j, "lemma", c.lemma, "checks");
        c.dirac = bool_or(j, "dirac", c.dirac, "checks");
    }
    return c;
}

json evaluate_record(const DataField& field, const Vec& u, const Checks& ch) {
    json r;
    r["coords"] = vec_json(u);
    try {
        DegenerateGKData d = field(u);
        GKReport g = analyze(d);
        r["star1"] = g.star1_residual;
        r["star2"] = g.star2_residual;
        r["min_eig"] = g.min_metric_eigenvalue;
        r["positive"] = g.min_metric_eigenvalue > 0;
        if (ch.lemma) r["lemma"] = lemma_residual(d, g.g);
        if (ch.dirac) r["dirac"] = dirac_residual(d);
        bool finite = std::isfinite(g.star1_residual) && std::isfinite(g.star2_residual) &&
                      std::isfinite(g.min_metric_eigenvalue);
        r["ok"] = finite;
        if (!finite) r["error"] = "non-finite result";
    } catch (const Error& e) {
        r["ok"] = false;
        r["error"] = e.what();
    }
    return r;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    try {
        c.raw = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::config, std::string("config parse error: ") + e.what());
    }
    check_keys(c.raw,
               {"schema", "description", "seed", "threads", "model", "potential", "brane", "grid", "samples", "rays",
                "tolerances", "integrator", "checks", "flow", "golden"},
               "config");
    if (!c.raw.contains("schema") || !c.raw.at("schema").is_number_integer() ||
        c.raw.at("schema").get<int>() != kConfigSchemaVersion)
        throw Error(ErrorCode::config, "config: schema must be 1");
    if (c.raw.contains("seed")) {
        if (!c.raw.at("seed").is_number_unsigned()) throw Error(ErrorCode::config, "seed: expected an unsigned integer");
        c.seed = c.raw.at("seed").get<uint64_t>();
    }
    if (c.raw.contains("threads")) {
        if (!c.raw.at("threads").is_number_integer() || c.raw.at("threads").get<int>() < 1)
            throw Error(ErrorCode::config, "threads: expected a positive integer");
        c.threads = c.raw.at("threads").get<int>();
    }
    if (c.raw.contains("description") && !c.raw.at("description").is_string())
        throw Error(ErrorCode::config, "description: expected a string");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

int resolve_threads(const RunConfig& cfg, int override_threads) {
    int t = cfg.threads;
    if (const char* env = std::getenv("GKPOT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw Error(ErrorCode::config, "GKPOT_THREADS must be a positive integer");
        t = static_cast<int>(v);
    }
    if (override_threads > 0) t = override_threads;
    return t;
}

MoritaModel build_model(const json& spec) {
    check_keys(spec, {"kind", "n", "twist", "preset", "omega_plus", "omega_minus"}, "model");
    if (!spec.contains("kind") || !spec.at("kind").is_string()) throw Error(ErrorCode::config, "model.kind is required");
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "affine") {
        if (spec.size() != 1) throw Error(ErrorCode::config, "model: the affine model takes no parameters");
        return make_affine_model();
    }
    if (kind == "cotangent") {
        int n = 2;
        if (spec.contains("n")) {
            if (!spec.at("n").is_number_integer()) throw Error(ErrorCode::config, "model.n: expected an integer");
            n = spec.at("n").get<int>();
        }
        if (n < 1 || n > 2) throw Error(ErrorCode::config, "model.n must be 1 or 2");
        FormField twist;
        if (spec.contains("twist")) {
            PotentialFn tw = build_potential(spec.at("twist"), n);
            twist = [tw](const Vec& w) { return potential_form(tw, w); };
        }
        return make_cotangent_model(n, twist);
    }
    if (kind == "pair") {
        CMat op, om;
        if (spec.contains("preset")) {
            if (spec.at("preset") != "quaternionic") throw Error(ErrorCode::config, "model.preset: only 'quaternionic' is known");
            if (spec.contains("omega_plus") || spec.contains("omega_minus"))
                throw Error(ErrorCode::config, "model: preset and explicit forms are exclusive");
            Mat I, J, K;
            quaternionic(I, J, K);
            const cplx i(0, 1);
            op = J.cast<cplx>() + i * K.cast<cplx>();
            om = -I.cast<cplx>() + i * K.cast<cplx>();
        } else {
            if (!spec.contains("omega_plus") || !spec.contains("omega_minus"))
                throw Error(ErrorCode::config, "model: pair needs a preset or omega_plus and omega_minus");
            op = complex_matrix(spec.at("omega_plus"), "model.omega_plus");
            om = complex_matrix(spec.at("omega_minus"), "model.omega_minus");
        }
        try {
            return make_pair_model(op, om);
        } catch (const Error& e) {
            throw Error(ErrorCode::config, e.what());
        }
    }
    throw Error(ErrorCode::config, "model.kind: unknown model '" + kind + "'");
}

PotentialFn build_potential(const json& spec, int n) {
    check_keys(spec, {"catalog", "params", "expression", "constants", "scale"}, "potential");
    PotentialFn K;
    if (spec.contains("catalog") == spec.contains("expression"))
        throw Error(ErrorCode::config, "potential: give exactly one of catalog or expression");
    auto str_map = [](const json& j, const std::string& where) {
        std::map<std::string, double> m;
        if (!j.is_object()) throw Error(ErrorCode::config, where + ": expected an object");
        for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = num(it.value(), where + "." + it.key());
        return m;
    };
    if (spec.contains("catalog")) {
        if (spec.contains("constants")) throw Error(ErrorCode::config, "potential: constants apply to expressions only");
        std::map<std::string, double> params;
        if (spec.contains("params")) params = str_map(spec.at("params"), "potential.params");
        for (auto& [k, v] : params)
            if (k != "C") throw Error(ErrorCode::config, "potential.params: unknown key '" + k + "'");
        K = catalog_potential(spec.at("catalog").get<std::string>(), n, params);
    } else {
        if (spec.contains("params")) throw Error(ErrorCode::config, "potential: params apply to catalog entries only");
        if (!spec.at("expression").is_string()) throw Error(ErrorCode::config, "potential.expression: expected a string");
        std::map<std::string, double> consts;
        if (spec.contains("constants")) consts = str_map(spec.at("constants"), "potential.constants");
        try {
            K = potential_from_expression(spec.at("expression").get<std::string>(), n, consts);
        } catch (const Error& e) {
            throw Error(ErrorCode::config, e.what());
        }
    }
    if (spec.contains("scale")) K = scaled(K, num(spec.at("scale"), "potential.scale"));
    return K;
}

BraneBisection build_brane(const RunConfig& cfg, const MoritaModel& m) {
    std::string kind = m.kind == ModelKind::pair ? "diagonal" : "potential";
    json flow_spec;
    if (cfg.raw.contains("brane")) {
        const json& b = cfg.raw.at("brane");
        check_keys(b, {"kind", "flow"}, "brane");
        if (b.contains("kind")) kind = b.at("kind").get<std::string>();
        if (b.contains("flow")) flow_spec = b.at("flow");
    }
    BraneBisection L;
    if (kind == "potential") {
        if (!cfg.raw.contains("potential")) throw Error(ErrorCode::config, "brane: a potential section is required");
        L = brane_from_potential(m, build_potential(cfg.raw.at("potential"), m.n));
    } else if (kind == "diagonal") {
        if (m.kind != ModelKind::pair) throw Error(ErrorCode::config, "brane: the diagonal brane needs the pair model");
        const json& spec = cfg.raw.at("model");
        CMat op, om;
        if (spec.contains("preset")) {
            Mat I, J, K;
            quaternionic(I, J, K);
            const cplx i(0, 1);
            op = J.cast<cplx>() + i * K.cast<cplx>();
            om = -I.cast<cplx>() + i * K.cast<cplx>();
        } else {
            op = complex_matrix(spec.at("omega_plus"), "model.omega_plus");
            om = complex_matrix(spec.at("omega_minus"), "model.omega_minus");
        }
        L = pair_diagonal_brane(op, om);
    } else {
        throw Error(ErrorCode::config, "brane.kind: unknown brane '" + kind + "'");
    }
    if (!flow_spec.is_null()) {
        check_keys(flow_spec, {"f", "t"}, "brane.flow");
        if (!flow_spec.contains("f") || !flow_spec.contains("t")) throw Error(ErrorCode::config, "brane.flow needs f and t");
        PotentialFn f = build_potential(flow_spec.at("f"), m.n);
        L = brane_flow_in_Z(m, L, f, num(flow_spec.at("t"), "brane.flow.t"), integrator(cfg));
    }
    return L;
}

Report cmd_verify(const RunConfig& cfg) {
    Scene sc = build_scene(cfg);
    Tolerances tol = tolerances(cfg);
    Checks ch = checks(cfg);
    auto pts = collect_points(cfg, sc.dim);
    if (pts.empty()) throw Error(ErrorCode::config, "verify: no grid or samples given");
    std::vector<json> recs(pts.size());
    parallel_for(pts.size(), cfg.threads, [&](size_t i) { recs[i] = evaluate_record(sc.field, pts[i], ch); });

    json summary;
    int failed = 0, nonpos = 0;
    double m1 = 0, m2 = 0, ml = 0, md = 0, mineig = std::numeric_limits<double>::infinity();
    for (auto& r : recs) {
        if (!r.at("ok").get<bool>()) {
            ++failed;
            continue;
        }
        m1 = std::max(m1, r.at("star1").get<double>());
        m2 = std::max(m2, r.at("star2").get<double>());
        if (r.contains("lemma")) ml = std::max(ml, r.at("lemma").get<double>());
        if (r.contains("dirac")) md = std::max(md, r.at("dirac").get<double>());
        mineig = std::min(mineig, r.at("min_eig").get<double>());
        if (!r.at("positive").get<bool>()) ++nonpos;
    }
    summary["points"] = recs.size();
    summary["failed"] = failed;
    summary["nonpositive"] = nonpos;
    summary["max_star1"] = m1;
    summary["max_star2"] = m2;
    if (ch.lemma) summary["max_lemma"] = ml;
    if (ch.dirac) summary["max_dirac"] = md;
    summary["min_min_eig"] = std::isfinite(mineig) ? json(mineig) : json(nullptr);
    bool pass = failed == 0 && m1 < tol.star && m2 < tol.star && ml < tol.lemma && md < tol.dirac &&
                (!tol.require_positive || nonpos == 0);
    summary["pass"] = pass;

    Report rep;
    rep.doc = base_doc(cfg, "verify");
    rep.doc["records"] = recs;
    rep.doc["summary"] = summary;
    rep.exit_code = pass ? 0 : 1;
    rep.doc["exit_code"] = rep.exit_code;
    rep.csv = records_csv(rep.doc["records"], sc.dim);
    return rep;
}

namespace {

BivectorField build_bivector(const json& spec, int dim) {
    check_keys(spec, {"kind", "sign", "matrix"}, "flow.bivector");
    std::string kind = spec.contains("kind") ? spec.at("kind").get<std::string>() : "zero";
    if (kind == "zero") return zero_bivector(dim);
    if (kind == "affine_base") {
        if (dim != 4) throw Error(ErrorCode::config, "flow.bivector: affine_base needs two complex coordinates");
        double sign = num_or(spec, "sign", 1.0, "flow.bivector");
        if (sign != 1.0 && sign != -1.0) throw Error(ErrorCode::config, "flow.bivector.sign must be +1 or -1");
        return affine_base_bivector(sign);
    }
    if (kind == "constant") {
        if (!spec.contains("matrix")) throw Error(ErrorCode::config, "flow.bivector: constant needs a matrix");
        try {
            return constant_bivector(matrix(spec.at("matrix"), dim, dim, "flow.bivector.matrix"));
        } catch (const Error& e) {
            throw Error(ErrorCode::config, e.what());
        }
    }
    throw Error(ErrorCode::config, "flow.bivector.kind: unknown kind '" + kind + "'");
}

}  // namespace

Report cmd_flow(const RunConfig& cfg) {
    if (!cfg.raw.contains("flow")) throw Error(ErrorCode::config, "flow: a flow section is required");
    const json& fs = cfg.raw.at("flow");
    check_keys(fs, {"n", "bivector", "f", "compare"}, "flow");
    int n = 2;
    if (fs.contains("n")) {
        if (!fs.at("n").is_number_integer()) throw Error(ErrorCode::config, "flow.n: expected an integer");
        n = fs.at("n").get<int>();
    }
    if (n < 1 || n > 4) throw Error(ErrorCode::config, "flow.n must be between 1 and 4");
    const int dim = 2 * n;
    if (!fs.contains("f")) throw Error(ErrorCode::config, "flow.f is required");
    PotentialFn f = build_potential(fs.at("f"), n);
    BivectorField Q = build_bivector(fs.contains("bivector") ? fs.at("bivector") : json::object(), dim);
    std::optional<PotentialFn> K;
    if (fs.contains("compare")) K = build_potential(fs.at("compare"), n);
    IntegratorConfig ic = integrator(cfg);
    Tolerances tol = tolerances(cfg);
    auto pts = collect_points(cfg, dim);
    if (pts.empty()) throw Error(ErrorCode::config, "flow: no grid or samples given");

    std::vector<json> recs(pts.size());
    parallel_for(pts.size(), cfg.threads, [&](size_t i) {
        json r;
        r["coords"] = vec_json(pts[i]);
        r["escaped"] = false;
        try {
            FlowConstruction fc = flow_construction(Q, f, pts[i], ic);
            r["star1"] = fc.star.star1;
            r["star2"] = fc.star.star2;
            r["step_error"] = fc.step_error;
            r["quad_error"] = fc.quad_error;
            GKReport g = analyze(fc.data);
            r["min_eig"] = g.min_metric_eigenvalue;
            if (K) r["compare"] = (fc.data.F - potential_form(*K, pts[i])).cwiseAbs().maxCoeff();
            r["ok"] = true;
        } catch (const Error& e) {
            r["ok"] = false;
            r["error"] = e.what();
            r["escaped"] = e.code == ErrorCode::flow_escape;
        }
        recs[i] = r;
    });

    int escaped = 0, failed = 0;
    double m1 = 0, m2 = 0, mc = 0;
    for (auto& r : recs) {
        if (r.at("escaped").get<bool>()) ++escaped;
        else if (!r.at("ok").get<bool>()) ++failed;
        if (!r.at("ok").get<bool>()) continue;
        m1 = std::max(m1, r.at("star1").get<double>());
        m2 = std::max(m2, r.at("star2").get<double>());
        if (r.contains("compare")) mc = std::max(mc, r.at("compare").get<double>());
    }
    double frac = static_cast<double>(escaped) / static_cast<double>(recs.size());
    json summary;
    summary["points"] = recs.size();
    summary["escaped"] = escaped;
    summary["failed"] = failed;
    summary["escape_fraction"] = frac;
    summary["max_star1"] = m1;
    summary["max_star2"] = m2;
    if (K) summary["max_compare"] = mc;
    bool pass = failed == 0 && frac <= tol.max_escape_fraction && m1 < tol.flow_star && m2 < tol.flow_star &&
                (!K || mc < tol.compare);
    summary["pass"] = pass;

    Report rep;
    rep.doc = base_doc(cfg, "flow");
    rep.doc["records"] = recs;
    rep.doc["summary"] = summary;
    rep.exit_code = pass ? 0 : 1;
    rep.doc["exit_code"] = rep.exit_code;
    rep.csv = records_csv(rep.doc["records"], dim);
    return rep;
}

Report cmd_scan(const RunConfig& cfg) {
    Scene sc = build_scene(cfg);
    Tolerances tol = tolerances(cfg);
    std::vector<Ray> rays;
    std::vector<std::optional<std::vector<double>>> expects;
    if (cfg.raw.contains("rays")) {
        if (!cfg.raw.at("rays").is_array()) throw Error(ErrorCode::config, "rays: expected an array");
        for (auto& rj : cfg.raw.at("rays")) {
            check_keys(rj, {"origin", "direction", "t0", "t1", "samples", "expect"}, "rays[]");
            Ray r;
            r.origin = to_vec(num_list(rj.at("origin"), "rays[].origin"));
            r.direction = to_vec(num_list(rj.at("direction"), "rays[].direction"));
            if (r.origin.size() != sc.dim || r.direction.size() != sc.dim)
                throw Error(ErrorCode::config, "rays[]: dimension differs from the chart");
            r.t0 = num_or(rj, "t0", 0.0, "rays[]");
            r.t1 = num_or(rj, "t1", 1.0, "rays[]");
            if (rj.contains("samples")) {
                if (!rj.at("samples").is_number_integer() || rj.at("samples").get<int>() < 2)
                    throw Error(ErrorCode::config, "rays[].samples: expected an integer >= 2");
                r.samples = rj.at("samples").get<int>();
            }
            rays.push_back(r);
            if (rj.contains("expect")) expects.push_back(num_list(rj.at("expect"), "rays[].expect"));
            else expects.push_back(std::nullopt);
        }
    }
    auto pts = collect_points(cfg, sc.dim);
    if (pts.empty() && rays.empty()) throw Error(ErrorCode::config, "scan: no rays, grid or samples given");
    LocusReport lr = positivity_scan(sc.field, pts, rays, cfg.threads);

    json recs = json::array();
    for (auto& r : lr.records) {
        json j;
        j["coords"] = vec_json(r.coords);
        j["ok"] = r.ok;
        if (r.ok) {
            j["min_eig"] = r.min_eig;
            j["star1"] = r.star1;
            j["star2"] = r.star2;
            j["positive"] = r.min_eig > 0;
        } else {
            j["error"] = r.error;
        }
        recs.push_back(j);
    }
    bool pass = lr.failures == 0;
    json bnds = json::array();
    std::ostringstream bcsv;
    bcsv << "ray,param";
    for (int i = 0; i < sc.dim; ++i) bcsv << ",u" << (i + 1);
    bcsv << "\n";
    for (size_t k = 0; k < lr.boundaries.size(); ++k) {
        const RayBoundary& b = lr.boundaries[k];
        json j;
        j["ray"] = b.ray;
        j["params"] = b.params;
        json p = json::array();
        for (auto& v : b.points) p.push_back(vec_json(v));
        j["points"] = p;
        j["failures"] = b.failures;
        if (expects[k]) {
            bool match = expects[k]->size() == b.params.size();
            for (size_t i = 0; match && i < b.params.size(); ++i)
                match = std::abs((*expects[k])[i] - b.params[i]) <= tol.boundary;
            j["expect"] = *expects[k];
            j["matched"] = match;
            pass = pass && match;
        }
        bnds.push_back(j);
        for (size_t i = 0; i < b.params.size(); ++i) {
            bcsv << b.ray << "," << fmt(b.params[i]);
            for (int c = 0; c < sc.dim; ++c) bcsv << "," << fmt(b.points[i](c));
            bcsv << "\n";
        }
    }
    json summary;
    summary["points"] = recs.size();
    summary["rays"] = rays.size();
    summary["failures"] = lr.failures;
    summary["boundaries_found"] = std::accumulate(lr.boundaries.begin(), lr.boundaries.end(), 0,
                                                  [](int a, const RayBoundary& b) { return a + static_cast<int>(b.params.size()); });
    summary["pass"] = pass;

    Report rep;
    rep.doc = base_doc(cfg, "scan");
    rep.doc["records"] = recs;
    rep.doc["boundaries"] = bnds;
    rep.doc["summary"] = summary;
    rep.exit_code = pass ? 0 : 1;
    rep.doc["exit_code"] = rep.exit_code;
    rep.csv = records_csv(rep.doc["records"], sc.dim);
    if (!rays.empty()) rep.doc["boundaries_csv"] = bcsv.str();
    return rep;
}

Report run_command(const RunConfig& cfg, const std::string& command) {
    if (command == "verify") return cmd_verify(cfg);
    if (command == "flow") return cmd_flow(cfg);
    if (command == "scan") return cmd_scan(cfg);
    throw Error(ErrorCode::config, "unknown command '" + command + "'");
}

namespace {

struct DiffCollector {
    std::vector<std::string> first;
    int count = 0;
    double tol = 1e-12;
    std::map<std::string, double> field_tol;

    void add(const std::string& path, const std::string& what) {
        ++count;
        if (first.size() < 10) first.push_back(path + ": " + what);
    }
    void compare(const json& a, const json& b, const std::string& path, const std::string& key) {
        if (a.is_number() && b.is_number()) {
            double t = field_tol.count(key) ? field_tol.at(key) : tol;
            double x = a.get<double>(), y = b.get<double>();
            if (!(std::abs(x - y) <= t) && !(std::isnan(x) && std::isnan(y)))
                add(path, fmt(x) + " vs " + fmt(y));
            return;
        }
        if (a.type() != b.type()) {
            add(path, "type differs");
            return;
        }
        if (a.is_object()) {
            for (auto it = a.begin(); it != a.end(); ++it) {
                if (!b.contains(it.key())) add(path + "." + it.key(), "missing in golden");
                else compare(it.value(), b.at(it.key()), path + "." + it.key(), it.key());
            }
            for (auto it = b.begin(); it != b.end(); ++it)
                if (!a.contains(it.key())) add(path + "." + it.key(), "missing in run");
            return;
        }
        if (a.is_array()) {
            if (a.size() != b.size()) {
                add(path, "length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
                return;
            }
            for (size_t i = 0; i < a.size(); ++i) compare(a[i], b[i], path + "[" + std::to_string(i) + "]", key);
            return;
        }
        if (a != b) add(path, "value differs");
    }
};

}  // namespace

Report cmd_golden(const RunConfig& cfg, const std::string& golden_path) {
    if (!cfg.raw.contains("golden")) throw Error(ErrorCode::config, "golden: a golden section is required");
    const json& gs = cfg.raw.at("golden");
    check_keys(gs, {"command", "path", "tolerance", "field_tolerances"}, "golden");
    std::string command = gs.contains("command") ? gs.at("command").get<std::string>() : "verify";
    std::string path = !golden_path.empty() ? golden_path : (gs.contains("path") ? gs.at("path").get<std::string>() : "");
    if (path.empty()) throw Error(ErrorCode::config, "golden: no golden file given");
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "golden: cannot open " + path);
    json golden;
    try {
        golden = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::io, std::string("golden: parse error: ") + e.what());
    }
    DiffCollector dc;
    dc.tol = num_or(gs, "tolerance", 1e-12, "golden");
    if (gs.contains("field_tolerances")) {
        const json& ft = gs.at("field_tolerances");
        if (!ft.is_object()) throw Error(ErrorCode::config, "golden.field_tolerances: expected an object");
        for (auto it = ft.begin(); it != ft.end(); ++it) dc.field_tol[it.key()] = num(it.value(), "golden.field_tolerances");
    }
    Report fresh = run_command(cfg, command);
    // the config echo must match bit for bit
    if (!golden.contains("config") || golden.at("config") != fresh.doc.at("config")) dc.add("config", "echo differs");
    for (const char* k : {"schema_version", "command", "records", "boundaries", "summary", "exit_code"}) {
        bool a = fresh.doc.contains(k), b = golden.contains(k);
        if (a != b) dc.add(k, "present in only one report");
        else if (a) dc.compare(fresh.doc.at(k), golden.at(k), k, k);
    }
    Report rep;
    rep.doc = base_doc(cfg, "golden");
    rep.doc["golden_path"] = path;
    rep.doc["diff_count"] = dc.count;
    rep.doc["diffs"] = dc.first;
    rep.exit_code = dc.count == 0 ? 0 : 1;
    rep.doc["exit_code"] = rep.exit_code;
    return rep;
}

void write_report(const Report& r, const std::string& dir, const std::string& prefix) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create output directory " + dir);
    auto base = std::filesystem::path(dir) / prefix;
    {
        std::ofstream out(base.string() + ".json");
        if (!out) throw Error(ErrorCode::io, "cannot write " + base.string() + ".json");
        out << r.doc.dump(2) << "\n";
    }
    if (!r.csv.empty()) {
        std::ofstream out(base.string() + ".csv");
        if (!out) throw Error(ErrorCode::io, "cannot write " + base.string() + ".csv");
        out << r.csv;
    }
    if (r.doc.contains("boundaries_csv")) {
        std::ofstream out(base.string() + "_boundaries.csv");
        if (!out) throw Error(ErrorCode::io, "cannot write boundaries csv");
        out << r.doc.at("boundaries_csv").get<std::string>();
    }
}

}  // namespace gkpot
