#include "laplace_cert/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lc {

ConfigError::ConfigError(const std::string& what, int line, int column)
    : ParameterError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                     what),
      line_(line),
      column_(column) {}

const char* to_string(ConstantsMode m) {
    switch (m) {
        case ConstantsMode::Auto: return "auto";
        case ConstantsMode::Analytic: return "analytic";
        case ConstantsMode::Estimate: return "estimate";
        case ConstantsMode::User: return "user";
    }
    return "?";
}

const char* to_string(OracleChoice o) {
    switch (o) {
        case OracleChoice::Auto: return "auto";
        case OracleChoice::Quadrature: return "quadrature";
        case OracleChoice::Importance: return "importance";
        case OracleChoice::None: return "none";
    }
    return "?";
}

const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::Eps: return "eps";
        case SweepAxis::Tau: return "tau";
        case SweepAxis::Dim: return "dim";
    }
    return "?";
}

OracleChoice parse_oracle(const std::string& s) {
    if (s == "auto") return OracleChoice::Auto;
    if (s == "quadrature") return OracleChoice::Quadrature;
    if (s == "importance") return OracleChoice::Importance;
    if (s == "none") return OracleChoice::None;
    throw ParameterError("oracle must be one of auto, quadrature, importance, none (got '" + s + "')");
}

namespace {

struct Entry {
    std::string value;
    int line, key_col, value_col;
};

std::string trim(const std::string& s, std::size_t& offset) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    offset = a;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    return k.find("..") == std::string::npos;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> e) : entries_(std::move(e)) {}

    const Entry* find(const std::string& k) {
        auto it = entries_.find(k);
        if (it == entries_.end()) return nullptr;
        used_.insert(k);
        return &it->second;
    }

    [[noreturn]] void fail(const Entry& e, const std::string& what) const {
        throw ConfigError(what, e.line, e.value_col);
    }

    double number(const std::string& k, double def) {
        const Entry* e = find(k);
        if (!e) return def;
        double v = 0.0;
        const char* b = e->value.data();
        const char* end = b + e->value.size();
        auto [p, ec] = std::from_chars(b, end, v);
        if (ec != std::errc() || p != end || !std::isfinite(v))
            fail(*e, "'" + k + "' expects a number, got '" + e->value + "'");
        return v;
    }

    long integer(const std::string& k, long def, long min) {
        const Entry* e = find(k);
        if (!e) return def;
        long v = 0;
        const char* b = e->value.data();
        const char* end = b + e->value.size();
        auto [p, ec] = std::from_chars(b, end, v);
        if (ec != std::errc() || p != end) fail(*e, "'" + k + "' expects an integer");
        if (v < min) fail(*e, "'" + k + "' must be >= " + std::to_string(min));
        return v;
    }

    std::string text(const std::string& k, const std::string& def) {
        const Entry* e = find(k);
        return e ? e->value : def;
    }

    bool flag(const std::string& k, bool def) {
        const Entry* e = find(k);
        if (!e) return def;
        if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
        if (e->value == "false" || e->value == "0" || e->value == "no") return false;
        fail(*e, "'" + k + "' expects true or false");
    }

    const std::map<std::string, Entry>& entries() const { return entries_; }
    bool used(const std::string& k) const { return used_.count(k) != 0; }
    void mark(const std::string& k) { used_.insert(k); }

private:
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

std::vector<double> parse_list(Reader& r, const Entry& e, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t off = 0;
        const std::string t = trim(item, off);
        double v = 0.0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || p != t.data() + t.size())
            r.fail(e, "'" + key + "' expects a comma-separated list of numbers");
        out.push_back(v);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = raw.substr(0, raw.find('#'));
        std::size_t off = 0;
        if (trim(line, off).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", line_no, static_cast<int>(off) + 1);
        std::size_t koff = 0, voff = 0;
        const std::string key = trim(line.substr(0, eq), koff);
        const std::string value = trim(line.substr(eq + 1), voff);
        const int key_col = static_cast<int>(koff) + 1;
        const int value_col = static_cast<int>(eq + 1 + voff) + 1;
        if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'", line_no, key_col);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no, value_col);
        if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no, key_col);
        entries.emplace(key, Entry{value, line_no, key_col, value_col});
    }

    Reader r(std::move(entries));
    ExperimentConfig c;
    const Entry* problem = r.find("problem");
    if (!problem) throw ConfigError("missing required key 'problem'", line_no + 1, 1);
    c.problem = problem->value;
    bool known = false;
    for (const auto& n : catalog_names()) known = known || n == c.problem;
    if (!known) r.fail(*problem, "unknown problem '" + c.problem + "'");
    for (const auto& [k, e] : r.entries())
        if (k.rfind("problem.", 0) == 0) {
            c.params[k.substr(8)] = e.value;
            r.mark(k);
        }

    if (const Entry* e = r.find("constants")) {
        if (e->value == "auto") c.constants = ConstantsMode::Auto;
        else if (e->value == "analytic") c.constants = ConstantsMode::Analytic;
        else if (e->value == "estimate") c.constants = ConstantsMode::Estimate;
        else if (e->value == "user") c.constants = ConstantsMode::User;
        else r.fail(*e, "constants must be one of auto, analytic, estimate, user");
    }
    const Entry* ek = r.find("constants.K");
    const Entry* ed = r.find("constants.delta");
    if (c.constants == ConstantsMode::User) {
        if (!ek || !ed) throw ConfigError("constants = user needs constants.K and constants.delta", line_no + 1, 1);
    }
    if (ek) {
        c.user_K = r.number("constants.K", 0.0);
        if (!(c.user_K >= 0.0)) r.fail(*ek, "constants.K must be >= 0");
    }
    if (ed) {
        c.user_delta = r.number("constants.delta", 1.0);
        if (!(c.user_delta > 0.0 && c.user_delta <= 1.0)) r.fail(*ed, "constants.delta must lie in (0, 1]");
    }
    c.constant_samples = static_cast<int>(r.integer("constants.samples", c.constant_samples, 1));
    if (const Entry* e = r.find("constants.radius")) {
        c.constant_radius = r.number("constants.radius", 0.0);
        if (!(c.constant_radius > 0.0)) r.fail(*e, "constants.radius must be positive");
    }

    if (const Entry* e = r.find("bounds")) {
        c.split_bound = c.closed_form = c.perturbation = false;
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t off = 0;
            const std::string t = trim(item, off);
            if (t == "thm31") c.split_bound = true;
            else if (t == "thm41") c.closed_form = true;
            else if (t == "sec5") c.perturbation = true;
            else r.fail(*e, "bounds entries must be thm31, thm41 or sec5 (got '" + t + "')");
        }
        if (c.perturbation && c.problem != "perturbed_linear")
            r.fail(*e, "the sec5 bound needs problem = perturbed_linear");
    } else {
        c.perturbation = c.problem == "perturbed_linear";
    }

    if (const Entry* e = r.find("oracle")) {
        try {
            c.oracle = parse_oracle(e->value);
        } catch (const ParameterError& err) {
            r.fail(*e, err.what());
        }
    }
    c.oracle_samples = r.integer("oracle.samples", c.oracle_samples, 1000);
    if (const Entry* e = r.find("oracle.tol")) {
        c.oracle_tol = r.number("oracle.tol", c.oracle_tol);
        if (!(c.oracle_tol > 0.0)) r.fail(*e, "oracle.tol must be positive");
    }

    if (const Entry* axis = r.find("sweep.axis")) {
        SweepSpec s;
        if (axis->value == "eps") s.axis = SweepAxis::Eps;
        else if (axis->value == "tau") s.axis = SweepAxis::Tau;
        else if (axis->value == "dim") s.axis = SweepAxis::Dim;
        else r.fail(*axis, "sweep.axis must be eps, tau or dim");
        if (s.axis == SweepAxis::Tau && c.problem != "perturbed_linear")
            r.fail(*axis, "a tau sweep needs problem = perturbed_linear");
        const Entry* values = r.find("sweep.values");
        const Entry* anchor = values ? values : axis;
        if (values) {
            s.values = parse_list(r, *values, "sweep.values");
        } else {
            const Entry* from = r.find("sweep.from");
            const Entry* to = r.find("sweep.to");
            if (!from || !to) r.fail(*axis, "a sweep needs sweep.values or sweep.from/sweep.to");
            const double a = r.number("sweep.from", 0.0), b = r.number("sweep.to", 0.0);
            const long n = r.integer("sweep.points", 11, 2);
            const bool log = r.flag("sweep.log", true);
            if (log && !(a > 0.0 && b > 0.0)) r.fail(*from, "log sweep needs positive endpoints");
            const double lo = std::min(a, b), hi = std::max(a, b);
            for (long i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / (n - 1);
                s.values.push_back(log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                       : lo + t * (hi - lo));
            }
            s.values.front() = lo;
            s.values.back() = hi;
        }
        if (s.values.empty()) r.fail(*anchor, "sweep grid is empty");
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (!(s.values[i] > 0.0)) r.fail(*anchor, "sweep values must be positive");
            if (i > 0 && !(s.values[i] > s.values[i - 1]))
                r.fail(*anchor, "sweep values must be strictly increasing");
            if (s.axis == SweepAxis::Dim && s.values[i] != std::floor(s.values[i]))
                r.fail(*anchor, "dimension sweep values must be integers");
        }
        c.sweep = s;
    }

    c.seed = static_cast<std::uint64_t>(r.integer("seed", 0, 0));
    c.output = r.text("output", c.output);
    c.density_grid = static_cast<int>(r.integer("densities.n_grid", c.density_grid, 3));
    c.multistart = static_cast<int>(r.integer("map.multistart", c.multistart, 0));

    for (const auto& [k, e] : r.entries())
        if (!r.used(k)) throw ConfigError("unknown key '" + k + "'", e.line, e.key_col);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'", 0, 0);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace lc
