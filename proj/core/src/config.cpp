#include "dgreedy/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dgreedy {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string unquote(const std::string& key, const std::string& v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
        if (v.back() != v.front()) throw ConfigError(key, "unterminated string");
        return v.substr(1, v.size() - 2);
    }
    return v;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

int to_small_int(const std::string& key, const std::string& v) {
    const long long x = to_int(key, v);
    if (x < -1000000 || x > 1000000) throw ConfigError(key, "out of range");
    return static_cast<int>(x);
}

std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace

std::string to_string(ProblemChoice p) {
    switch (p) {
        case ProblemChoice::cd: return "cd";
        case ProblemChoice::transport: return "transport";
        case ProblemChoice::transport_jump: return "transport_jump";
        case ProblemChoice::synthetic_saddle: return "synthetic_saddle";
    }
    return "cd";
}

ProblemChoice problem_from_string(const std::string& s) {
    if (s == "cd") return ProblemChoice::cd;
    if (s == "transport") return ProblemChoice::transport;
    if (s == "transport_jump") return ProblemChoice::transport_jump;
    if (s == "synthetic_saddle") return ProblemChoice::synthetic_saddle;
    throw ConfigError("problem", "unknown problem '" + s + "'");
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void ExperimentConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon", "must be positive");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw ConfigError("omega", "must be nonnegative");
    if (trial_level < 1) throw ConfigError("trial_level", "must be at least 1");
    if (test_level <= trial_level) throw ConfigError("test_level", "must exceed trial_level");
    if (test_level > 12) throw ConfigError("test_level", "at most 12");
    if (sample_count < 2) throw ConfigError("sample_count", "need at least 2 samples");
    if (!(interval_lo > 0.0 && interval_hi < std::numbers::pi && interval_lo < interval_hi))
        throw ConfigError("parameter_interval", "must be an ordered subinterval of (0, pi)");
    if (!(zeta > 0.0 && zeta < 1.0)) throw ConfigError("zeta", "must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
    if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
    if (n_max < 1) throw ConfigError("n_max", "must be at least 1");
    if (cycles < 0) throw ConfigError("cycles", "must be nonnegative");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    if (piece && (*piece < 0 || *piece > 1)) throw ConfigError("piece", "must be 0 or 1");
    if (threads < 0) throw ConfigError("threads", "must be nonnegative");
}

void set_config_value(ExperimentConfig& cfg, const std::string& key_in, const std::string& raw) {
    const std::string key = trim(key_in);
    const std::string v = unquote(key, trim(raw));
    if (key == "problem") {
        cfg.problem = problem_from_string(v);
    } else if (key == "epsilon") {
        cfg.epsilon = to_double(key, v);
    } else if (key == "omega") {
        cfg.omega = to_double(key, v);
    } else if (key == "trial_level") {
        cfg.trial_level = to_small_int(key, v);
    } else if (key == "test_level") {
        cfg.test_level = to_small_int(key, v);
    } else if (key == "sample_count") {
        cfg.sample_count = to_small_int(key, v);
    } else if (key == "parameter_interval") {
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw ConfigError(key, "expected [lo, hi]");
        const std::string body = v.substr(1, v.size() - 2);
        const auto comma = body.find(',');
        if (comma == std::string::npos) throw ConfigError(key, "expected [lo, hi]");
        cfg.interval_lo = to_double(key, trim(body.substr(0, comma)));
        cfg.interval_hi = to_double(key, trim(body.substr(comma + 1)));
    } else if (key == "zeta") {
        cfg.zeta = to_double(key, v);
    } else if (key == "delta") {
        cfg.delta = to_double(key, v);
    } else if (key == "tol") {
        cfg.tol = to_double(key, v);
    } else if (key == "n_max") {
        cfg.n_max = to_small_int(key, v);
    } else if (key == "cycles") {
        cfg.cycles = to_small_int(key, v);
    } else if (key == "output_dir") {
        cfg.output_dir = v;
    } else if (key == "seed") {
        const long long s = to_int(key, v);
        if (s < 0) throw ConfigError(key, "must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "piece") {
        if (v == "all") cfg.piece.reset();
        else cfg.piece = to_small_int(key, v);
    } else if (key == "surrogate") {
        if (v == "auto") cfg.surrogate.reset();
        else if (v == "truth_dual") cfg.surrogate = SurrogateKind::truth_dual;
        else if (v == "reduced_dual") cfg.surrogate = SurrogateKind::reduced_dual;
        else throw ConfigError(key, "unknown surrogate '" + v + "'");
    } else if (key == "loop") {
        if (v == "auto") cfg.loop.reset();
        else if (v == "inf_sup") cfg.loop = StabLoop::inf_sup;
        else if (v == "delta") cfg.loop = StabLoop::delta;
        else throw ConfigError(key, "unknown loop '" + v + "'");
    } else if (key == "threads") {
        cfg.threads = to_small_int(key, v);
    } else {
        throw ConfigError(key, "unknown key");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        set_config_value(cfg, body.substr(0, eq), body.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "problem = \"" << to_string(cfg.problem) << "\"\n";
    out << "epsilon = " << format_double(cfg.epsilon) << "\n";
    out << "omega = " << format_double(cfg.omega) << "\n";
    out << "trial_level = " << cfg.trial_level << "\n";
    out << "test_level = " << cfg.test_level << "\n";
    out << "sample_count = " << cfg.sample_count << "\n";
    out << "parameter_interval = [" << format_double(cfg.interval_lo) << ", " << format_double(cfg.interval_hi)
        << "]\n";
    out << "zeta = " << format_double(cfg.zeta) << "\n";
    out << "delta = " << format_double(cfg.delta) << "\n";
    out << "tol = " << format_double(cfg.tol) << "\n";
    out << "n_max = " << cfg.n_max << "\n";
    out << "cycles = " << cfg.cycles << "\n";
    out << "output_dir = \"" << cfg.output_dir << "\"\n";
    out << "seed = " << cfg.seed << "\n";
    out << "piece = " << (cfg.piece ? std::to_string(*cfg.piece) : std::string("\"all\"")) << "\n";
    out << "surrogate = \""
        << (!cfg.surrogate ? "auto" : *cfg.surrogate == SurrogateKind::truth_dual ? "truth_dual" : "reduced_dual")
        << "\"\n";
    out << "loop = \"" << (!cfg.loop ? "auto" : *cfg.loop == StabLoop::inf_sup ? "inf_sup" : "delta") << "\"\n";
    out << "threads = " << cfg.threads << "\n";
    return out.str();
}

GreedyConfig greedy_config(const ExperimentConfig& cfg) {
    GreedyConfig g;
    g.tol = cfg.tol;
    g.n_max = cfg.n_max;
    g.stab.zeta = cfg.zeta;
    g.stab.delta = cfg.delta;
    const bool transport =
        cfg.problem == ProblemChoice::transport || cfg.problem == ProblemChoice::transport_jump;
    g.surrogate = cfg.surrogate.value_or(transport ? SurrogateKind::reduced_dual : SurrogateKind::truth_dual);
    g.loop = cfg.loop.value_or(transport ? StabLoop::delta : StabLoop::inf_sup);
    g.tightening.cycles = cfg.cycles;
    return g;
}

}  // namespace dgreedy
