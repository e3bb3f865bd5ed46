#pragma once

// Experiment configurations and runners for the command-line tool.
//
// A config is flat `key = value` text with dotted sections. Every run resolves
// the config (defaults filled in), builds its operators, evaluates a list of
// named assertions and writes deterministic artifacts that start with the
// resolved config.

#include "mourrelab.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace mlab::cli {

/// Config problem; `line` is 0 when no single line is to blame.
class ConfigError : public Error {
public:
    ConfigError(const std::string& source, int line, const std::string& what)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

enum class Kind { spectrum, mourre, propagate, ggt, verify };

inline const char* to_string(Kind k) {
    switch (k) {
        case Kind::spectrum: return "spectrum";
        case Kind::mourre: return "mourre";
        case Kind::propagate: return "propagate";
        case Kind::ggt: return "ggt";
        case Kind::verify: return "verify";
    }
    return "?";
}

inline const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> t = {
        {"algebra", 1e-10},         // exact matrix identities
        {"circulant", 1e-8},        // eigenphases against symbol samples
        {"ggt_laurent", 1e-10},     // constant GGT against L_{f_a}
        {"horizon", 1e-10},         // collar mass certifying the wrap horizon
        {"identity", 1e-8},         // windowed commutator identities
        {"localization", 0.99},     // mass of deficient Mourre vectors near the perturbation
        {"mourre", 0.05},           // slack below c for the unperturbed compression
        {"mourre_perturbed", 0.1},  // slack below c defining deficient eigenvalues
        {"norm", 1e-12},            // norm drift along a trace
        {"rate", 0.02},             // relative error of the ballistic rate
        {"residual", 1e-8},         // eigen-residual
        {"row_formula", 1e-8},      // row formula against the resolvent construction
        {"telescoping", 1e-8},      // telescoping and quadratic identities
        {"unitary", 1e-10},         // unitarity defect
    };
    return t;
}

// ---------------------------------------------------------------------------
// Raw key-value text

struct Setting {
    std::string value;
    int line = 0;
};

struct RawConfig {
    std::string source = "<config>";
    std::map<std::string, Setting> entries;

    bool has(const std::string& k) const { return entries.count(k) > 0; }
    int line(const std::string& k) const { return has(k) ? entries.at(k).line : 0; }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline RawConfig parse_raw(std::istream& is, const std::string& source) {
    RawConfig raw;
    raw.source = source;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, lineno, "empty key");
        if (key.find_first_of(" \t") != std::string::npos) throw ConfigError(source, lineno, "key contains whitespace");
        if (value.empty()) throw ConfigError(source, lineno, "empty value for '" + key + "'");
        if (raw.has(key))
            throw ConfigError(source, lineno, "duplicate key '" + key + "' (first set on line " + std::to_string(raw.line(key)) + ")");
        raw.entries[key] = {value, lineno};
    }
    return raw;
}

// ---------------------------------------------------------------------------
// Typed config

struct ExperimentConfig {
    std::string source = "<config>";
    std::filesystem::path base_dir = ".";
    Kind kind = Kind::verify;
    std::uint64_t seed = 0;
    std::vector<int> sides;
    Boundary boundary = Boundary::periodic;
    double a = 2.0;
    bool a_given = false;
    std::string symbol_file;
    std::string verblunsky_file;
    std::optional<Arc> arc;
    double smoothing = 0.08;
    int n_max = 400;
    Coord psi0;
    bool rate_bounds = false;
    int collar = 40;
    int inner = 20;
    double range_tol = 0.01;
    int rank_budget = 10;
    std::map<std::string, double> tol = default_tolerances();
    std::string output = "out";

    double tolerance(const std::string& name) const { return tol.at(name); }
    int dim() const { return static_cast<int>(sides.size()); }
    Box box(Boundary b) const { return Box(sides, b); }

    std::filesystem::path resolve(const std::string& file) const {
        const std::filesystem::path p(file);
        return p.is_absolute() ? p : base_dir / p;
    }

    /// Every key with its effective value, in a fixed order. The artifact
    /// directory is left out so that runs into different directories agree.
    std::vector<std::pair<std::string, std::string>> resolved() const {
        std::vector<std::pair<std::string, std::string>> r;
        auto join = [](const std::vector<int>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
            return s;
        };
        r.emplace_back("kind", to_string(kind));
        r.emplace_back("seed", std::to_string(seed));
        r.emplace_back("box.sides", join(sides));
        r.emplace_back("box.boundary", mlab::to_string(boundary));
        r.emplace_back("symbol.a", fmt17(a));
        r.emplace_back("symbol.file", symbol_file.empty() ? "none" : symbol_file);
        r.emplace_back("verblunsky.file", verblunsky_file.empty() ? "none" : verblunsky_file);
        r.emplace_back("arc.low", arc ? fmt17(arc->low) : "none");
        r.emplace_back("arc.high", arc ? fmt17(arc->high) : "none");
        r.emplace_back("arc.smoothing", fmt17(smoothing));
        r.emplace_back("dynamics.n_max", std::to_string(n_max));
        r.emplace_back("dynamics.psi0", join(psi0));
        r.emplace_back("dynamics.rate_bounds", rate_bounds ? "true" : "false");
        r.emplace_back("mourre.collar", std::to_string(collar));
        r.emplace_back("mourre.inner", std::to_string(inner));
        r.emplace_back("mourre.range_tol", fmt17(range_tol));
        r.emplace_back("mourre.rank_budget", std::to_string(rank_budget));
        for (const auto& [k, v] : tol) r.emplace_back("tolerance." + k, fmt17(v));
        return r;
    }
};

namespace detail {

inline double parse_real(const RawConfig& raw, const std::string& key) {
    const Setting& s = raw.entries.at(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s.value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.value.size() || !std::isfinite(v))
        throw ConfigError(raw.source, s.line, "'" + key + "' expects a real number, got '" + s.value + "'");
    return v;
}

inline long long parse_int(const RawConfig& raw, const std::string& key) {
    const Setting& s = raw.entries.at(key);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s.value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.value.size()) throw ConfigError(raw.source, s.line, "'" + key + "' expects an integer, got '" + s.value + "'");
    return v;
}

inline std::vector<int> parse_int_list(const RawConfig& raw, const std::string& key) {
    const Setting& s = raw.entries.at(key);
    std::vector<int> out;
    std::stringstream ss(s.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size())
            throw ConfigError(raw.source, s.line, "'" + key + "' expects a comma-separated integer list, got '" + s.value + "'");
        out.push_back(v);
    }
    return out;
}

inline bool parse_bool(const RawConfig& raw, const std::string& key) {
    const Setting& s = raw.entries.at(key);
    if (s.value == "true" || s.value == "1") return true;
    if (s.value == "false" || s.value == "0") return false;
    throw ConfigError(raw.source, s.line, "'" + key + "' expects true or false, got '" + s.value + "'");
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& source, int line) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!text.empty() && text[0] != '-') v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError(source, line, "seed expects an unsigned 64-bit integer, got '" + text + "'");
    return v;
}

}  // namespace detail

/// Turns raw settings into a validated config. `seed_override` (the --seed flag)
/// takes precedence over the `seed` key; one of the two is required.
inline ExperimentConfig resolve_config(const RawConfig& raw, std::optional<std::uint64_t> seed_override = std::nullopt,
                                       const std::filesystem::path& base_dir = ".") {
    static const std::set<std::string> known = {
        "kind", "seed", "output", "box.sides", "box.boundary", "symbol.a", "symbol.file", "verblunsky.file",
        "arc.low", "arc.high", "arc.smoothing", "dynamics.n_max", "dynamics.psi0", "dynamics.rate_bounds",
        "mourre.collar", "mourre.inner", "mourre.range_tol", "mourre.rank_budget"};
    const auto& tol_defaults = default_tolerances();
    for (const auto& [k, s] : raw.entries) {
        if (known.count(k)) continue;
        if (k.rfind("tolerance.", 0) == 0 && tol_defaults.count(k.substr(10))) continue;
        throw ConfigError(raw.source, s.line, "unknown key '" + k + "'");
    }

    ExperimentConfig c;
    c.source = raw.source;
    c.base_dir = base_dir;
    if (!raw.has("kind")) throw ConfigError(raw.source, 0, "missing required key 'kind'");
    {
        const Setting& s = raw.entries.at("kind");
        static const std::map<std::string, Kind> kinds = {{"spectrum", Kind::spectrum}, {"mourre", Kind::mourre},
                                                          {"propagate", Kind::propagate}, {"ggt", Kind::ggt},
                                                          {"verify", Kind::verify}};
        auto it = kinds.find(s.value);
        if (it == kinds.end())
            throw ConfigError(raw.source, s.line, "unknown kind '" + s.value + "' (spectrum, mourre, propagate, ggt, verify)");
        c.kind = it->second;
    }
    if (seed_override) {
        c.seed = *seed_override;
    } else if (raw.has("seed")) {
        c.seed = detail::parse_seed(raw.entries.at("seed").value, raw.source, raw.line("seed"));
    } else {
        throw ConfigError(raw.source, 0, "missing required key 'seed' (or pass --seed)");
    }

    switch (c.kind) {
        case Kind::spectrum: c.sides = {63}; break;
        case Kind::ggt: c.sides = {127}; break;
        case Kind::mourre: c.sides = {255}; break;
        case Kind::propagate: c.sides = {1025}; break;
        case Kind::verify: c.sides = {201}; break;
    }
    if (raw.has("box.sides")) c.sides = detail::parse_int_list(raw, "box.sides");
    try {
        Box probe(c.sides, Boundary::periodic);
    } catch (const DomainError& e) {
        throw ConfigError(raw.source, raw.line("box.sides"), e.what());
    }
    if (raw.has("box.boundary")) {
        const Setting& s = raw.entries.at("box.boundary");
        if (s.value == "periodic")
            c.boundary = Boundary::periodic;
        else if (s.value == "open")
            c.boundary = Boundary::open;
        else
            throw ConfigError(raw.source, s.line, "box.boundary must be periodic or open");
        if (c.boundary == Boundary::open && c.kind != Kind::verify)
            throw ConfigError(raw.source, s.line, std::string("kind ") + to_string(c.kind) +
                                                      " builds U on a periodic box (conjugate operators use the open box automatically)");
    }

    if (raw.has("symbol.a")) {
        c.a = detail::parse_real(raw, "symbol.a");
        c.a_given = true;
        if (!(c.a > 1.0)) throw ConfigError(raw.source, raw.line("symbol.a"), "symbol.a must exceed 1");
    }
    auto file_key = [&](const std::string& key, std::string& dst) {
        if (!raw.has(key)) return;
        dst = raw.entries.at(key).value;
        if (!std::filesystem::exists(c.resolve(dst)))
            throw ConfigError(raw.source, raw.line(key), "file not found: " + c.resolve(dst).string());
    };
    file_key("symbol.file", c.symbol_file);
    file_key("verblunsky.file", c.verblunsky_file);
    if (!c.symbol_file.empty() && c.a_given)
        throw ConfigError(raw.source, raw.line("symbol.file"), "symbol.a and symbol.file are mutually exclusive");
    if (!c.symbol_file.empty() && !c.verblunsky_file.empty())
        throw ConfigError(raw.source, raw.line("verblunsky.file"), "a Verblunsky profile fixes the symbol f_a; drop symbol.file");
    if (c.symbol_file.empty() && c.dim() != 1)
        throw ConfigError(raw.source, raw.line("box.sides"), "the GGT symbol lives on a line; multi-axis boxes need symbol.file");
    if (c.kind == Kind::ggt && c.dim() != 1) throw ConfigError(raw.source, raw.line("box.sides"), "kind ggt needs a line");
    if (c.kind == Kind::verify && c.dim() != 1) throw ConfigError(raw.source, raw.line("box.sides"), "kind verify runs on a line");

    if (raw.has("arc.low") != raw.has("arc.high"))
        throw ConfigError(raw.source, raw.line(raw.has("arc.low") ? "arc.low" : "arc.high"), "arc needs both arc.low and arc.high");
    if (raw.has("arc.low")) {
        const double lo = detail::parse_real(raw, "arc.low"), hi = detail::parse_real(raw, "arc.high");
        if (normalize_phase(lo) == normalize_phase(hi))
            throw ConfigError(raw.source, raw.line("arc.high"), "malformed arc: arc.low and arc.high coincide on the circle");
        c.arc = Arc(lo, hi);
    } else if (c.kind == Kind::mourre) {
        c.arc = Arc(kPi - 0.25, kPi + 0.25);
    }
    if (raw.has("arc.smoothing")) {
        c.smoothing = detail::parse_real(raw, "arc.smoothing");
        if (!(c.smoothing > 0.0)) throw ConfigError(raw.source, raw.line("arc.smoothing"), "arc.smoothing must be positive");
    }
    if (c.arc && c.smoothing >= c.arc->width() / 2.0)
        throw ConfigError(raw.source, raw.line("arc.smoothing"), "arc.smoothing must stay below half the arc width");

    if (raw.has("dynamics.n_max")) {
        const long long n = detail::parse_int(raw, "dynamics.n_max");
        if (n < 1 || n > 100000) throw ConfigError(raw.source, raw.line("dynamics.n_max"), "dynamics.n_max must lie in [1, 100000]");
        c.n_max = static_cast<int>(n);
    }
    c.psi0 = Coord(c.sides.size(), 0);
    if (raw.has("dynamics.psi0")) {
        c.psi0 = detail::parse_int_list(raw, "dynamics.psi0");
        if (c.psi0.size() != c.sides.size())
            throw ConfigError(raw.source, raw.line("dynamics.psi0"), "dynamics.psi0 needs one coordinate per axis");
        if (!Box(c.sides, Boundary::open).contains(c.psi0))
            throw ConfigError(raw.source, raw.line("dynamics.psi0"), "dynamics.psi0 lies outside the box");
    }
    if (raw.has("dynamics.rate_bounds")) c.rate_bounds = detail::parse_bool(raw, "dynamics.rate_bounds");

    auto nonneg_int = [&](const std::string& key, int& dst) {
        if (!raw.has(key)) return;
        const long long v = detail::parse_int(raw, key);
        if (v < 0 || v > 1000000) throw ConfigError(raw.source, raw.line(key), "'" + key + "' must be a non-negative integer");
        dst = static_cast<int>(v);
    };
    nonneg_int("mourre.collar", c.collar);
    nonneg_int("mourre.inner", c.inner);
    nonneg_int("mourre.rank_budget", c.rank_budget);
    if (raw.has("mourre.range_tol")) {
        c.range_tol = detail::parse_real(raw, "mourre.range_tol");
        if (!(c.range_tol > 0.0 && c.range_tol < 1.0))
            throw ConfigError(raw.source, raw.line("mourre.range_tol"), "mourre.range_tol must lie in (0, 1)");
    }
    if (c.kind == Kind::mourre && 2 * (c.collar + c.inner) >= Box(c.sides, Boundary::open).min_side())
        throw ConfigError(raw.source, raw.line("mourre.collar"), "mourre.collar + mourre.inner leave no interior window");

    for (const auto& [k, s] : raw.entries) {
        if (k.rfind("tolerance.", 0) != 0) continue;
        const double v = detail::parse_real(raw, k);
        if (!(v > 0.0)) throw ConfigError(raw.source, s.line, "'" + k + "' must be positive");
        c.tol[k.substr(10)] = v;
    }
    if (raw.has("output")) c.output = raw.entries.at("output").value;
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    const RawConfig raw = parse_raw(in, path.string());
    return resolve_config(raw, seed_override, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

// ---------------------------------------------------------------------------
// Results and artifacts

struct Assertion {
    std::string key;
    double value = 0.0;
    double limit = 0.0;
    bool passed = false;
    std::string detail;
};

struct RunResult {
    std::vector<Assertion> assertions;
    std::vector<std::string> artifacts;
    std::vector<std::string> notes;

    bool ok() const {
        return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
    }
    const Assertion* failing() const {
        for (const auto& a : assertions)
            if (!a.passed) return &a;
        return nullptr;
    }
    const Assertion& get(const std::string& key) const {
        for (const auto& a : assertions)
            if (a.key == key) return a;
        throw Error("no assertion named " + key);
    }
};

inline Assertion at_most(const std::string& key, double value, double limit, std::string detail = {}) {
    return {key, value, limit, std::isfinite(value) && value <= limit, std::move(detail)};
}

inline Assertion at_least(const std::string& key, double value, double limit, std::string detail = {}) {
    return {key, value, limit, std::isfinite(value) && value >= limit, std::move(detail)};
}

using Json = nlohmann::ordered_json;

class ArtifactWriter {
public:
    ArtifactWriter(const ExperimentConfig& cfg, std::filesystem::path dir) : cfg_(cfg), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::string csv(const std::string& name, const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows) const {
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        for (const auto& [k, v] : cfg_.resolved()) os << "# " << k << " = " << v << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt17(r[i]);
            os << "\n";
        }
        if (!os) throw Error("cannot write " + path.string());
        return path.string();
    }

    std::string json(const std::string& name, const Json& body) const {
        Json j;
        for (const auto& [k, v] : cfg_.resolved()) j["config." + k] = v;
        for (const auto& [k, v] : body.items()) j[k] = v;
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        os << j.dump(2) << "\n";
        if (!os) throw Error("cannot write " + path.string());
        return path.string();
    }

private:
    const ExperimentConfig& cfg_;
    std::filesystem::path dir_;
};

/// Non-finite numbers become strings so every artifact stays valid JSON.
inline Json num(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline void record(Json& j, const std::vector<Assertion>& as) {
    for (const auto& a : as) {
        j[a.key + ".value"] = num(a.value);
        j[a.key + ".limit"] = num(a.limit);
        j[a.key + ".passed"] = a.passed;
    }
}

// ---------------------------------------------------------------------------
// Random test operators

/// Two brick-wall layers of seeded random 2x2 unitaries on a periodic line;
/// exactly unitary with bandwidth 2.
inline LatticeOperator brickwall_unitary(const Box& box, std::mt19937_64& rng) {
    if (box.dim() != 1 || !box.periodic()) throw DomainError("brickwall_unitary needs a periodic line");
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    const auto n = static_cast<Eigen::Index>(box.size());
    auto layer = [&](Eigen::Index start) {
        Matrix m = Matrix::Identity(n, n);
        for (Eigen::Index p = start; p + 1 < n; p += 2) {
            const double th = angle(rng), al = angle(rng), be = angle(rng), ph = angle(rng);
            const cplx g = std::polar(1.0, ph);
            m(p, p) = g * std::polar(std::cos(th), al);
            m(p, p + 1) = g * std::polar(std::sin(th), be);
            m(p + 1, p) = -g * std::polar(std::sin(th), -be);
            m(p + 1, p + 1) = g * std::polar(std::cos(th), -al);
        }
        return m;
    };
    LatticeOperator u = make_operator(box, layer(1) * layer(0));
    certify(u, true, false);
    u.flags.bandwidth = 2;
    return u;
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) {
        const double re = g(rng);
        x = cplx(re, g(rng));
    }
    return v.normalized();
}

// ---------------------------------------------------------------------------
// Shared construction

struct Model {
    Symbol f;                 // symbol of the unperturbed operator
    bool ggt_symbol = false;  // f = f_a
    double a = 2.0;
    std::optional<PerturbationProfile> profile;
    std::optional<VerblunskySequence> seq;
    LatticeOperator u;        // periodic
    LatticeOperator u0;       // unperturbed periodic operator (same as u without a profile)
    int effective_bandwidth = 0;

    bool perturbed() const { return profile.has_value(); }
};

inline Model build_model(const ExperimentConfig& cfg) {
    Model m;
    const Box per = cfg.box(Boundary::periodic);
    if (!cfg.symbol_file.empty()) {
        std::ifstream in(cfg.resolve(cfg.symbol_file));
        m.f = read_symbol(in);
        if (m.f.dim != cfg.dim()) throw ConfigError(cfg.source, 0, "symbol dimension differs from box.sides");
    } else {
        m.a = cfg.a;
        if (!cfg.verblunsky_file.empty()) {
            std::ifstream in(cfg.resolve(cfg.verblunsky_file));
            m.profile = read_profile(in);
            m.a = a_of(m.profile->alpha_inf);
            if (cfg.a_given && std::abs(m.a - cfg.a) > 1e-9)
                throw ConfigError(cfg.source, 0, "symbol.a " + fmt17(cfg.a) + " contradicts the profile tail (a = " + fmt17(m.a) + ")");
        }
        m.f = ggt_symbol(m.a);
        m.ggt_symbol = true;
    }
    m.u0 = laurent_op(per, m.f);
    m.effective_bandwidth = m.f.bandwidth();
    if (m.profile) {
        m.seq = m.profile->compose();
        m.u = build_ggt(per, *m.seq);
        m.effective_bandwidth = std::max(1, ggt_tail_cut(*m.seq, 1e-16));
        m.u.flags.bandwidth = m.effective_bandwidth;
    } else {
        m.u = m.u0;
    }
    if (!m.u.flags.unitary) throw PrecisionError("U is not unitary: defect " + fmt17(m.u.unitary_defect));
    return m;
}

/// Conjugate operator A_{i f grad conj f} on the open box.
inline LatticeOperator build_conjugate(const Model& m, const Box& open) {
    if (m.ggt_symbol) return conjugate_op_ggt(open, m.a, ggt_series_cut(m.a, open.size()));
    return conjugate_op(open, derived_symbols(m.f).conjugate_weights);
}

/// Eigenphases sampled from the symbol on the grid 2 pi k / N_j.
inline std::vector<double> symbol_phase_samples(const Symbol& f, const Box& box) {
    std::vector<double> ph;
    std::vector<int> k(box.dim(), 0);
    while (true) {
        TorusPoint t(box.dim());
        for (int j = 0; j < box.dim(); ++j) t[j] = kTwoPi * k[j] / box.sides()[j];
        ph.push_back(normalize_phase(std::arg(f.trig_sum(t))));
        int j = box.dim() - 1;
        while (j >= 0 && ++k[j] == box.sides()[j]) k[j--] = 0;
        if (j < 0) break;
    }
    std::sort(ph.begin(), ph.end());
    return ph;
}

/// Largest distance between sorted phase lists, matched as multisets on the circle.
inline double phase_multiset_distance(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) return std::numeric_limits<double>::infinity();
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const std::size_t n = x.size();
    double best = std::numeric_limits<double>::infinity();
    // a phase near 0 may sort to the other end of one list; try the neighbouring alignments
    for (std::size_t shift : {std::size_t{0}, std::size_t{1}, n - 1}) {
        double m = 0.0;
        for (std::size_t k = 0; k < n; ++k) m = std::max(m, phase_distance(x[k], y[(k + shift) % n]));
        best = std::min(best, m);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Runners

inline RunResult run_spectrum(const ExperimentConfig& cfg, const ArtifactWriter& out) {
    RunResult r;
    const Model m = build_model(cfg);
    const SpectralData s = unitary_eig(m.u);
    const double tol_u = cfg.tolerance("unitary");
    r.assertions.push_back(at_most("spectrum.unitarity", m.u.unitary_defect, tol_u));
    r.assertions.push_back(at_most("spectrum.residual", s.residual, cfg.tolerance("residual")));

    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const Vector v = s.vectors.col(static_cast<Eigen::Index>(k));
        const cplx lam = v.dot(m.u.matrix * v);
        rows.push_back({static_cast<double>(k), s.phases(static_cast<Eigen::Index>(k)), std::abs(std::abs(lam) - 1.0),
                        participation_ratio(v)});
    }
    r.artifacts.push_back(out.csv("spectrum.csv", {"index", "phase", "modulus_defect", "participation_ratio"}, rows));

    if (!m.perturbed()) {
        std::vector<double> got(s.phases.data(), s.phases.data() + s.phases.size());
        r.assertions.push_back(at_most("spectrum.circulant", phase_multiset_distance(got, symbol_phase_samples(m.f, m.u.box)),
                                       cfg.tolerance("circulant")));
    }
    if (m.ggt_symbol) {
        const EssentialArcReport e = essential_arc_compare(s, m.a, 0.0);
        if (!m.perturbed()) {
            r.assertions.push_back(at_most("spectrum.essential_arc", static_cast<double>(e.outside), 0.0, "phases outside Theta_a"));
        } else {
            r.assertions.push_back(at_most("spectrum.extended_outliers", static_cast<double>(e.outside - e.localized_outliers()), 0.0,
                                           "outliers with participation >= 0.2 N"));
            for (const auto& o : e.outliers)
                r.notes.push_back("outlier phase " + fmt17(o.phase) + " participation " + fmt17(o.participation));
        }
    }
    return r;
}

inline RunResult run_ggt(const ExperimentConfig& cfg, const ArtifactWriter& out) {
    RunResult r;
    const Box per = cfg.box(Boundary::periodic), open = cfg.box(Boundary::open);
    PerturbationProfile profile;
    bool have_profile = false;
    if (!cfg.verblunsky_file.empty()) {
        std::ifstream in(cfg.resolve(cfg.verblunsky_file));
        profile = read_profile(in);
        have_profile = true;
    } else {
        profile.alpha_inf = VerblunskySequence::constant_for(cfg.a).tail();
    }
    const VerblunskySequence seq = profile.compose();
    const double a = a_of(profile.alpha_inf);
    const LatticeOperator h = build_ggt(per, seq);
    Json j;
    j["a"] = num(a);
    j["unitarity_defect"] = num(h.unitary_defect);
    r.assertions.push_back(at_most("ggt.unitarity", h.unitary_defect, cfg.tolerance("unitary")));

    const int cut = ggt_tail_cut(seq, 0.1 * cfg.tolerance("row_formula"));
    const LatticeOperator rows = build_ggt_rows(open, seq, cut);
    double row_res = 0.0;
    std::size_t cols = 0;
    for (std::size_t k = 0; k < open.size(); ++k) {
        if (open.depth(open.coord(k)) < cut + 1) continue;
        ++cols;
        row_res = std::max(row_res, (h.matrix.col(static_cast<Eigen::Index>(k)) - rows.matrix.col(static_cast<Eigen::Index>(k)))
                                        .cwiseAbs()
                                        .maxCoeff());
    }
    j["row_formula.tail_cut"] = cut;
    j["row_formula.columns"] = cols;
    if (cols > 0)
        r.assertions.push_back(at_most("ggt.row_formula", row_res, cfg.tolerance("row_formula")));
    else
        r.notes.push_back("box too small for an interior column at tail cut " + std::to_string(cut));

    if (!have_profile || seq.window().empty()) {
        const LatticeOperator l = laurent_op(per, ggt_symbol(a));
        r.assertions.push_back(at_most("ggt.laurent_match", max_abs(h.matrix - l.matrix), cfg.tolerance("ggt_laurent")));
    }
    if (have_profile) {
        const int hw = per.half(0);
        auto pad = [&](const Sequence& s) { return Sequence::from(-hw, hw, [&](int k) { return s.at(k); }); };
        PerturbationProfile padded = profile;
        padded.u = pad(profile.u);
        padded.v = pad(profile.v);
        padded.w = pad(profile.w);
        const HypothesisReport hr = hypothesis_check(padded, hw / profile.b2);
        j["hypothesis.u_integral"] = num(hr.u_integral.integral);
        j["hypothesis.u_tail_increment"] = num(hr.u_integral.tail_increment);
        j["hypothesis.u_truncated"] = hr.u_integral.truncated;
        j["hypothesis.dv_integral"] = num(hr.dv_integral.integral);
        j["hypothesis.q1_v"] = num(hr.q1_v.value);
        j["hypothesis.q2_w"] = num(hr.q2_w.value);
        j["hypothesis.v_outer_sup"] = num(hr.v_outer_sup);
        j["hypothesis.w_outer_sup"] = num(hr.w_outer_sup);
        r.assertions.push_back({"ggt.hypothesis", hr.ok() ? 1.0 : 0.0, 1.0, hr.ok(), "u, v, w bullets"});
    }
    record(j, r.assertions);
    r.artifacts.push_back(out.json("ggt.json", j));
    return r;
}

inline RunResult run_mourre(const ExperimentConfig& cfg, const ArtifactWriter& out) {
    RunResult r;
    const Model m = build_model(cfg);
    const Box per = cfg.box(Boundary::periodic), open = cfg.box(Boundary::open);
    const LatticeOperator a = build_conjugate(m, open);
    const SpectralData s = (!m.perturbed() && cfg.dim() == 1) ? circulant_spectral_data(per, m.f) : unitary_eig(m.u);
    const Arc arc = *cfg.arc;
    const Matrix phi = arc_filter(per, s, arc, cfg.smoothing).matrix;
    const DerivedSymbols d = derived_symbols(m.f);
    const MourreConstants mc = mourre_constant(m.f, arc, d.grad_norm_sq, 4096);
    const CompressionWindow win = CompressionWindow::by_depth(per, cfg.collar, cfg.inner, cfg.range_tol);
    const MourreReport rep = mourre_check(m.u, a, phi, win, mc, arc);

    Json j;
    j["arc.low"] = num(arc.low);
    j["arc.high"] = num(arc.high);
    j["c"] = num(rep.c_lower);
    j["C"] = num(rep.C_upper);
    j["lambda_min"] = num(rep.lambda_min);
    j["lambda_max"] = num(rep.lambda_max);
    j["rank"] = rep.rank;
    j["margin"] = num(rep.margin);
    if (!m.perturbed()) {
        r.assertions.push_back(at_least("mourre.lambda_min", rep.lambda_min, rep.c_lower - cfg.tolerance("mourre")));
    } else {
        const double thr = rep.c_lower - cfg.tolerance("mourre_perturbed");
        const auto mask = mask_union(perturbation_support(m.u.matrix, m.u0.matrix),
                                     depth_band(per, cfg.collar, cfg.collar + cfg.inner));
        const Deficiency def = deficiency(rep, thr, mask);
        j["deficiency.threshold"] = num(thr);
        j["deficiency.count"] = def.count;
        j["deficiency.min_mass"] = num(def.min_mass());
        for (std::size_t k = 0; k < def.count; ++k) {
            j["deficiency." + std::to_string(k) + ".eigenvalue"] = num(def.eigenvalues[k]);
            j["deficiency." + std::to_string(k) + ".mass"] = num(def.localized_mass[k]);
        }
        r.assertions.push_back(at_most("mourre.deficiency_count", static_cast<double>(def.count), cfg.rank_budget));
        r.assertions.push_back(at_least("mourre.deficiency_localized", def.min_mass(), cfg.tolerance("localization")));
    }
    record(j, r.assertions);
    r.artifacts.push_back(out.json("mourre.json", j));
    return r;
}

inline RunResult run_propagate(const ExperimentConfig& cfg, const ArtifactWriter& out) {
    RunResult r;
    const Model m = build_model(cfg);
    const Box per = cfg.box(Boundary::periodic);
    const Vector psi0 = basis_vector(per, cfg.psi0);
    EvolveOptions eo;
    eo.k = central_projector(per, 2);
    eo.bandwidth = m.effective_bandwidth;
    eo.horizon_tol = cfg.tolerance("horizon");
    std::optional<SpectralData> spec;
    if (cfg.arc) {
        spec = (!m.perturbed() && cfg.dim() == 1) ? circulant_spectral_data(per, m.f) : unitary_eig(m.u);
        eo.arc_operator = arc_projector(per, *spec, *cfg.arc).matrix;
    }
    const PropagationTrace tr = evolve(m.u, psi0, cfg.n_max, eo);
    std::vector<std::vector<double>> rows;
    double drift = 0.0;
    for (const auto& st : tr.steps) {
        rows.push_back({static_cast<double>(st.n), st.x_norm, st.plain_norm, st.rage_partial, st.arc_weight});
        drift = std::max(drift, std::abs(st.plain_norm - 1.0));
    }
    r.artifacts.push_back(out.csv("trace.csv", {"n", "x_norm", "plain_norm", "rage_partial", "arc_weight"}, rows));
    r.assertions.push_back(at_most("propagate.norm", drift, cfg.tolerance("norm")));

    Json j;
    j["wrap_horizon"] = tr.wrap_horizon;
    j["band_horizon"] = tr.band_horizon;
    j["bandwidth"] = tr.bandwidth;
    j["steps"] = tr.steps.size();
    if (tr.steps.size() >= 32) {
        const RateFit fit = ballistic_rate(tr);
        j["rate"] = num(fit.slope);
        j["intercept"] = num(fit.intercept);
        j["fit_lo"] = fit.fit_lo;
        j["fit_hi"] = fit.fit_hi;
        if (!m.perturbed()) {
            const LatticeOperator g2 = laurent_op(per, derived_symbols(m.f).grad_norm_sq);
            const double oracle = std::sqrt(std::max(0.0, psi0.dot(g2.matrix * psi0).real()));
            j["oracle"] = num(oracle);
            r.assertions.push_back(at_most("propagate.rate", std::abs(fit.slope / oracle - 1.0), cfg.tolerance("rate"),
                                           "relative error against ||L_{|grad f|} psi0||"));
        }
    } else {
        r.assertions.push_back({"propagate.rate", static_cast<double>(tr.steps.size()), 32.0, false,
                                "trace shorter than 32 steps before the wrap horizon"});
    }
    if (cfg.rate_bounds) {
        RateBoundsOptions ro;
        ro.n_max = cfg.n_max;
        if (cfg.arc) {
            ro.arc = cfg.arc;
            ro.smoothing = cfg.smoothing;
            ro.spectrum = &*spec;
            if (m.perturbed() && m.ggt_symbol)
                for (const auto& o : essential_arc_compare(*spec, m.a, 0.0).outliers) ro.excluded_phases.push_back(o.phase);
        }
        LatticeOperator u = m.u;
        u.flags.bandwidth = m.effective_bandwidth;
        const RateBoundsReport rb = rate_bounds_check(u, m.f, psi0, ro);
        j["bounds.rate"] = num(rb.rate);
        j["bounds.commutator_norm"] = num(rb.commutator_norm);
        j["bounds.upper"] = num(rb.upper_bound);
        r.assertions.push_back(at_most("propagate.upper_bound", rb.rate, rb.upper_bound * (1.0 + ro.slack)));
        if (rb.has_window) {
            j["bounds.window_low"] = num(rb.window_low);
            j["bounds.window_high"] = num(rb.window_high);
            j["bounds.c"] = num(rb.c);
            j["bounds.C"] = num(rb.C);
            r.assertions.push_back({"propagate.window", rb.rate, rb.window_low, rb.window_ok, "rate inside [sqrt c, sqrt C] ||Phi psi||"});
        }
    }
    record(j, r.assertions);
    r.artifacts.push_back(out.json("rate.json", j));
    return r;
}

inline RunResult run_verify(const ExperimentConfig& cfg, const ArtifactWriter& out) {
    RunResult r;
    std::mt19937_64 rng(cfg.seed);
    const Box per = cfg.box(Boundary::periodic), open = cfg.box(Boundary::open);
    const Symbol f = cfg.symbol_file.empty() ? ggt_symbol(cfg.a) : [&] {
        std::ifstream in(cfg.resolve(cfg.symbol_file));
        return read_symbol(in);
    }();
    const double alg = cfg.tolerance("algebra");
    const double ident = cfg.tolerance("identity");
    const double tele = cfg.tolerance("telescoping");
    const int bw = f.bandwidth();
    if (2 * bw + 1 >= static_cast<int>(open.size()))
        throw ConfigError(cfg.source, 0, "verify needs box.sides > 2 * symbol bandwidth + 1 = " + std::to_string(2 * bw + 1));

    // adjoint and multiplicativity on the periodic box
    const LatticeOperator l = laurent_op(per, f);
    r.assertions.push_back(at_most("verify.laurent_adjoint", max_abs(l.matrix.adjoint() - laurent_op(per, conj(f)).matrix), alg));
    r.assertions.push_back(at_most("verify.multiplicativity", max_abs(l.matrix * l.matrix - laurent_op(per, multiply(f, f)).matrix), alg));

    // (X L_h - L_h X) = -i L_{h'} on the interior window
    const LatticeOperator lo = laurent_op(open, f);
    const RealVector x = coordinates(open, 0);
    const Matrix ad = x.asDiagonal() * lo.matrix - lo.matrix * x.asDiagonal();
    const Matrix rhs = -kI * laurent_op(open, partial(f, 0)).matrix;
    r.assertions.push_back(at_most("verify.windowed_commutator", restricted_norm(ad - rhs, open.interior(bw)), ident));

    const int margin = std::min(40, open.half(0) - 1);
    const IdentityResidual id = identity_check_laurent(f, open, margin);
    r.assertions.push_back(at_most("verify.commutator_identity", id.residual, ident, "margin " + std::to_string(margin)));

    // U*AU - A = U*[A, U] and the quadratic-form identity
    const LatticeOperator a = conjugate_op(open, derived_symbols(f).conjugate_weights);
    const SandwichResult sw = sandwich(l, a);
    const double scale = std::max(1.0, max_abs(a.matrix));
    r.assertions.push_back(at_most("verify.sandwich", std::max(sw.ad_residual, sw.hermitian_defect) / scale, alg));
    {
        const Vector phi = random_vector(per.size(), rng), psi = random_vector(per.size(), rng);
        const Matrix& b = sw.b.matrix;
        const Matrix a2 = a.matrix * a.matrix;
        const Matrix ua2u = l.matrix.adjoint() * a2 * l.matrix - a2;
        const cplx lhs = (b * phi).dot(a.matrix * psi) + (a.matrix * phi).dot(b * psi);
        const cplx rhs2 = phi.dot(ua2u * psi) - (b * phi).dot(b * psi);
        r.assertions.push_back(at_most("verify.quadratic_form", std::abs(lhs - rhs2) / (scale * scale), alg, "relative to max|A|^2"));
    }

    // telescoping: shift closed form, Laurent operator, random brick-wall unitary
    {
        const LatticeOperator t = shift_op(per, {1});
        const TelescopingResult ts = telescoping_check(t, basis_vector(per, {0}), 10, true, cfg.tolerance("horizon"));
        double res = std::max(ts.residual, std::abs(ts.forward_lhs - 100.0));
        EvolveOptions eo;
        eo.horizon_tol = cfg.tolerance("horizon");
        const int n_l = std::min(10, evolve(l, basis_vector(per, {0}), 10, eo).wrap_horizon);
        res = std::max(res, telescoping_check(l, basis_vector(per, {0}), n_l, true, cfg.tolerance("horizon")).residual);
        const LatticeOperator bwu = brickwall_unitary(per, rng);
        res = std::max(res, telescoping_check(bwu, basis_vector(per, {0}), 10, true, cfg.tolerance("horizon")).residual);
        r.assertions.push_back(at_most("verify.telescoping", res, tele));
    }
    {
        const LatticeOperator t = shift_op(per, {1});
        double res = 0.0;
        for (int c0 : {0, 5}) {
            const QuadraticResult q = corollary_quadratic_check(t, basis_vector(per, {c0}), {0, 1, 5, 10});
            res = std::max(res, q.max_residual());
        }
        r.assertions.push_back(at_most("verify.corollary_quadratic", res, tele));
    }

    // constant GGT against L_{f_a}, circulant spectrum
    if (cfg.symbol_file.empty()) {
        const LatticeOperator h = build_ggt(per, VerblunskySequence::constant_for(cfg.a));
        r.assertions.push_back(at_most("verify.ggt_constant", max_abs(h.matrix - l.matrix), cfg.tolerance("ggt_laurent")));
    }
    {
        const SpectralData s = unitary_eig(l);
        std::vector<double> got(s.phases.data(), s.phases.data() + s.phases.size());
        r.assertions.push_back(at_most("verify.circulant_spectrum", phase_multiset_distance(got, symbol_phase_samples(f, per)),
                                       cfg.tolerance("circulant")));
    }

    Json j;
    j["checks"] = r.assertions.size();
    record(j, r.assertions);
    r.artifacts.push_back(out.json("verify.json", j));
    return r;
}

inline RunResult run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    const ArtifactWriter out(cfg, out_dir);
    switch (cfg.kind) {
        case Kind::spectrum: return run_spectrum(cfg, out);
        case Kind::mourre: return run_mourre(cfg, out);
        case Kind::propagate: return run_propagate(cfg, out);
        case Kind::ggt: return run_ggt(cfg, out);
        case Kind::verify: return run_verify(cfg, out);
    }
    throw Error("unreachable");
}

// ---------------------------------------------------------------------------
// Plans

namespace detail {

inline std::string seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, s < 1.0 ? "<1 s" : "~%.0f s", s);
    return buf;
}

// Rough single-core costs: a Jacobi eigendecomposition and a dense product.
inline double jacobi_cost(double n) { return 1.1e-7 * n * n * n; }
inline double product_cost(double n) { return 4e-9 * n * n * n; }

}  // namespace detail

struct Plan {
    std::vector<std::string> operators;
    std::vector<std::string> checks;
    std::vector<std::string> facts;
    double seconds = 0.0;
    std::optional<int> band_horizon;
};

inline Plan plan(const ExperimentConfig& cfg) {
    Plan p;
    const Box per = cfg.box(Boundary::periodic);
    const double n = static_cast<double>(per.size());
    const bool profile = !cfg.verblunsky_file.empty();
    const std::string f_name = cfg.symbol_file.empty() ? "f_a with a = " + fmt17(cfg.a) : "symbol from " + cfg.symbol_file;
    const std::string u_name = profile ? "U = H(alpha) from " + cfg.verblunsky_file + " on " + per.describe()
                                       : "U = L_f (" + f_name + ") on " + per.describe();
    switch (cfg.kind) {
        case Kind::spectrum:
            p.operators = {u_name};
            p.checks = {"spectrum.unitarity", "spectrum.residual"};
            if (!profile) p.checks.push_back("spectrum.circulant");
            if (cfg.symbol_file.empty()) p.checks.push_back(profile ? "spectrum.extended_outliers" : "spectrum.essential_arc");
            p.facts = {"artifact spectrum.csv (index, phase, modulus_defect, participation_ratio)"};
            p.seconds = 2.0 * detail::jacobi_cost(n);
            break;
        case Kind::ggt:
            p.operators = {"H(alpha) by the resolvent formula on " + per.describe(), "row-formula H on the open box"};
            p.checks = {"ggt.unitarity", "ggt.row_formula"};
            if (!profile) p.checks.push_back("ggt.laurent_match");
            if (profile) p.checks.push_back("ggt.hypothesis");
            p.facts = {"artifact ggt.json"};
            p.seconds = 4.0 * detail::product_cost(n);
            break;
        case Kind::mourre:
            p.operators = {u_name, "A = A_{i f grad conj f} on the open box", "Phi(U) smoothed arc filter",
                           "compression onto range(P_outer Phi P_inner)"};
            p.checks = profile ? std::vector<std::string>{"mourre.deficiency_count", "mourre.deficiency_localized"}
                               : std::vector<std::string>{"mourre.lambda_min"};
            p.facts = {"arc [" + fmt17(cfg.arc->low) + ", " + fmt17(cfg.arc->high) + "], smoothing " + fmt17(cfg.smoothing),
                       "outer window depth >= " + std::to_string(cfg.collar) + ", inner depth >= " +
                           std::to_string(cfg.collar + cfg.inner),
                       "artifact mourre.json"};
            p.seconds = (profile ? 3.0 : 1.0) * detail::jacobi_cost(n) + 6.0 * detail::product_cost(n);
            break;
        case Kind::propagate: {
            p.operators = {u_name};
            if (cfg.arc) p.operators.push_back("arc projector for the arc_weight column");
            p.checks = {"propagate.norm", "propagate.rate"};
            if (cfg.rate_bounds) {
                p.operators.push_back("A = A_{i f grad conj f} and [A, U] on the seam-free window");
                p.checks.push_back("propagate.upper_bound");
                if (cfg.arc) p.checks.push_back("propagate.window");
            }
            int bw = 0;
            if (profile) {
                std::ifstream in(cfg.resolve(cfg.verblunsky_file));
                bw = std::max(1, ggt_tail_cut(read_profile(in).compose(), 1e-16));
            } else if (cfg.symbol_file.empty()) {
                bw = ggt_symbol(cfg.a).bandwidth();
            } else {
                std::ifstream in(cfg.resolve(cfg.symbol_file));
                bw = read_symbol(in).bandwidth();
            }
            const int margin = per.depth(cfg.psi0);
            p.band_horizon = bw == 0 ? cfg.n_max : std::min(cfg.n_max, margin / bw);
            p.facts = {"psi0 = e_(" + [&] {
                           std::string s;
                           for (std::size_t i = 0; i < cfg.psi0.size(); ++i) s += (i ? "," : "") + std::to_string(cfg.psi0[i]);
                           return s;
                       }() + "), support margin " + std::to_string(margin) + ", bandwidth " + std::to_string(bw),
                       "wrap horizon (band arithmetic) = " + std::to_string(*p.band_horizon) +
                           "; extended at run time while the collar mass stays below " + fmt17(cfg.tolerance("horizon")),
                       "artifacts trace.csv (n, x_norm, plain_norm, rage_partial, arc_weight) and rate.json"};
            p.seconds = cfg.n_max * n * n * 4e-9 + (cfg.arc && profile ? 2.0 * detail::jacobi_cost(n) : 0.0) +
                        (cfg.rate_bounds ? 4.0 * detail::product_cost(n) : 0.0);
            break;
        }
        case Kind::verify:
            p.operators = {"L_f on " + per.describe() + " and " + Box(cfg.sides, Boundary::open).describe(),
                           "A = A_{i f grad conj f} on the open box", "shift T, brick-wall random unitary (seed " +
                                                                          std::to_string(cfg.seed) + ")"};
            p.checks = {"verify.laurent_adjoint", "verify.multiplicativity", "verify.windowed_commutator",
                        "verify.commutator_identity", "verify.sandwich", "verify.quadratic_form", "verify.telescoping",
                        "verify.corollary_quadratic"};
            if (cfg.symbol_file.empty()) p.checks.push_back("verify.ggt_constant");
            p.checks.push_back("verify.circulant_spectrum");
            p.facts = {"artifact verify.json"};
            p.seconds = 2.0 * detail::jacobi_cost(n) + 12.0 * detail::product_cost(n);
            break;
    }
    return p;
}

inline void describe(const ExperimentConfig& cfg, std::ostream& os) {
    const Plan p = plan(cfg);
    os << "experiment " << to_string(cfg.kind) << " (" << cfg.source << ")\n";
    os << "operators:\n";
    for (const auto& o : p.operators) os << "  - " << o << "\n";
    os << "checks (" << p.checks.size() << "):\n";
    for (const auto& c : p.checks) os << "  - " << c << "\n";
    for (const auto& f : p.facts) os << f << "\n";
    if (p.band_horizon) os << "wrap_horizon = " << *p.band_horizon << "\n";
    os << "expected runtime " << detail::seconds(p.seconds) << "\n";
}

}  // namespace mlab::cli
