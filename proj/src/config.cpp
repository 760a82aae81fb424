#include <svmm/config.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace svmm {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        out.push_back(trim(cur));
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what)
{
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw Error(Errc::ConfigError, what + ": not a number: '" + text + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& text, const std::string& what)
{
    // accept 100000, 1e5 and 100K style values as long as they are integral
    std::string t = text;
    double scale = 1.0;
    if (!t.empty() && (t.back() == 'K' || t.back() == 'k')) {
        scale = 1e3;
        t.pop_back();
    } else if (!t.empty() && (t.back() == 'M' || t.back() == 'm')) {
        scale = 1e6;
        t.pop_back();
    }
    const double v = parse_double(t, what) * scale;
    if (v != std::floor(v) || std::abs(v) > 9e15) {
        throw Error(Errc::ConfigError, what + ": not an integer: '" + text + "'");
    }
    return static_cast<std::int64_t>(v);
}

std::string g17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path, std::vector<std::string>& header)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open " + path);
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        auto cells = split(t, ',');
        if (first) {
            first = false;
            const bool numeric = !cells.empty() && (std::isdigit(static_cast<unsigned char>(cells[0][0])) || cells[0][0] == '-'
                                                    || cells[0][0] == '+' || cells[0][0] == '.');
            if (!numeric) {
                header = cells;
                continue;
            }
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::vector<double> column(const std::string& path, const std::vector<std::string>& preferred, bool last_default)
{
    std::vector<std::string> header;
    const auto rows = read_csv_rows(path, header);
    std::size_t col = 0;
    bool found = false;
    for (const auto& name : preferred) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it != header.end()) {
            col = static_cast<std::size_t>(it - header.begin());
            found = true;
            break;
        }
    }
    if (!found) {
        const std::size_t width = header.empty() ? (rows.empty() ? 1 : rows[0].size()) : header.size();
        if (width == 1) {
            col = 0;
        } else if (last_default) {
            col = width - 1;
        } else {
            throw Error(Errc::IoError, path + ": no '" + preferred.front() + "' column");
        }
    }
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (col >= rows[i].size()) {
            throw Error(Errc::IoError, path + ": row " + std::to_string(i + 1) + " is too short");
        }
        out.push_back(parse_double(rows[i][col], path + " row " + std::to_string(i + 1)));
    }
    return out;
}

JumpSpec jump_from_config(const Config& c)
{
    JumpSpec j;
    j.lambda = c.get_double("jump.lambda", 0.0);
    const auto dist = c.get_string("jump.dist", "normal");
    if (dist == "normal") {
        j.dist = JumpDist::normal(c.get_double("jump.mean", 0.0), c.get_double("jump.sd", 0.0));
    } else if (dist == "exponential") {
        j.dist = JumpDist::exponential(c.get_double("jump.mean", 0.0));
    } else {
        throw Error(Errc::ConfigError, "jump.dist must be normal or exponential, got " + dist);
    }
    return j;
}

} // namespace

Config Config::parse(std::string_view text, const std::string& source)
{
    Config c;
    c.source_ = source;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const auto body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error(Errc::ConfigError, source + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(body.substr(0, eq));
        const auto value = trim(body.substr(eq + 1));
        if (key.empty()) {
            throw Error(Errc::ConfigError, source + ":" + std::to_string(lineno) + ": empty key");
        }
        c.set(key, value);
    }
    return c;
}

Config Config::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open config " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

bool Config::has(const std::string& key) const { return raw(key).has_value(); }

std::optional<std::string> Config::raw(const std::string& key) const
{
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const
{
    return raw(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const
{
    const auto v = raw(key);
    return v ? parse_double(*v, key) : fallback;
}

double Config::require_double(const std::string& key) const
{
    const auto v = raw(key);
    if (!v) {
        throw Error(Errc::ConfigError, source_ + ": missing key " + key);
    }
    return parse_double(*v, key);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const
{
    const auto v = raw(key);
    return v ? parse_int(*v, key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    const auto v = raw(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
        return false;
    }
    throw Error(Errc::ConfigError, key + ": not a boolean: '" + *v + "'");
}

void Config::set(const std::string& key, const std::string& value)
{
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

std::vector<std::string> Config::unknown_keys(const std::vector<std::string>& known) const
{
    std::vector<std::string> out;
    for (const auto& [key, value] : entries_) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const std::string& pat) {
            if (!pat.empty() && pat.back() == '*') {
                return key.compare(0, pat.size() - 1, pat, 0, pat.size() - 1) == 0;
            }
            return key == pat;
        });
        if (!ok) {
            out.push_back(key);
        }
    }
    return out;
}

const std::vector<std::string>& model_config_keys()
{
    static const std::vector<std::string> keys = {
        "model",        "setting",        "mu",          "k",           "theta",           "sigma_v",
        "rho",          "h",              "N",           "substeps",    "stationary_start", "record_variance",
        "replication",  "burn_in",        "jump.lambda", "jump.dist",   "jump.mean",        "jump.sd",
        "factor1.k",    "factor1.theta",  "factor1.sigma_v", "factor2.k", "factor2.theta",    "factor2.sigma_v",
    };
    return keys;
}

const std::vector<std::string>& experiment_config_keys()
{
    static const std::vector<std::string> keys = {"settings", "setting.*", "N", "h", "replications", "substeps",
                                                  "master_seed", "threads", "M", "stderr", "tables"};
    return keys;
}

std::string model_cli_name(const ModelSpec& model)
{
    switch (model.index()) {
    case 0: return "heston";
    case 1: return "svj-return";
    case 2: return "svj-variance";
    default: return "two-factor";
    }
}

ModelSpec model_from_config(const Config& c, const std::optional<std::string>& model_override)
{
    HestonParams p;
    if (c.has("setting")) {
        p = builtin_setting(c.get_string("setting", "")).params;
    }
    p.mu = c.get_double("mu", p.mu);
    p.k = c.get_double("k", p.k);
    p.theta = c.get_double("theta", p.theta);
    p.sigma_v = c.get_double("sigma_v", p.sigma_v);
    p.rho = c.get_double("rho", p.rho);
    const auto name = model_override.value_or(c.get_string("model", "heston"));
    ModelSpec out;
    if (name == "heston") {
        out = model::Heston{p};
    } else if (name == "svj-return") {
        out = model::ReturnJump{p, jump_from_config(c)};
    } else if (name == "svj-variance") {
        out = model::VarianceJump{p, jump_from_config(c)};
    } else if (name == "two-factor") {
        TwoFactorParams t;
        t.mu = p.mu;
        t.factor1 = {c.get_double("factor1.k", p.k), c.get_double("factor1.theta", p.theta),
                     c.get_double("factor1.sigma_v", p.sigma_v)};
        t.factor2 = {c.get_double("factor2.k", 0.0), c.get_double("factor2.theta", 0.0),
                     c.get_double("factor2.sigma_v", 0.0)};
        out = model::TwoFactor{t};
    } else {
        throw Error(Errc::ConfigError, "unknown model '" + name + "' (heston, svj-return, svj-variance, two-factor)");
    }
    validate_model(out);
    return out;
}

SamplingGrid grid_from_config(const Config& c)
{
    SamplingGrid g{c.get_double("h", 1.0), c.get_int("N", 100000), static_cast<int>(c.get_int("substeps", 20))};
    validate_grid(g);
    return g;
}

SimulationOptions simulation_options_from_config(const Config& c)
{
    SimulationOptions o;
    o.replication = static_cast<std::uint64_t>(c.get_int("replication", 0));
    o.stationary_start = c.get_bool("stationary_start", true);
    o.record_variance = c.get_bool("record_variance", false);
    o.burn_in = static_cast<int>(c.get_int("burn_in", -1));
    return o;
}

ExperimentSpec experiment_from_config(const Config& c)
{
    ExperimentSpec s;
    for (const auto& [key, value] : c.entries()) {
        if (key.rfind("setting.", 0) == 0) {
            const auto v = split(value, ',');
            if (v.size() != 5) {
                throw Error(Errc::ConfigError, key + ": expected mu,k,theta,sigma_v,rho");
            }
            HestonParams p{parse_double(v[0], key), parse_double(v[1], key), parse_double(v[2], key),
                           parse_double(v[3], key), parse_double(v[4], key)};
            s.settings.push_back({key.substr(8), p});
        }
    }
    if (c.has("settings") || s.settings.empty()) {
        std::vector<NamedSetting> named;
        for (const auto& name : split(c.get_string("settings", "S0"), ',')) {
            const auto custom = std::find_if(s.settings.begin(), s.settings.end(),
                                             [&](const NamedSetting& x) { return x.name == name; });
            named.push_back(custom != s.settings.end() ? *custom : builtin_setting(name));
        }
        s.settings = named;
    }
    if (c.has("N")) {
        s.N_list.clear();
        for (const auto& v : split(c.get_string("N", ""), ',')) {
            s.N_list.push_back(parse_int(v, "N"));
        }
    }
    if (c.has("h")) {
        s.h_list.clear();
        for (const auto& v : split(c.get_string("h", ""), ',')) {
            s.h_list.push_back(parse_double(v, "h"));
        }
    }
    s.replications = static_cast<int>(c.get_int("replications", s.replications));
    s.substeps = static_cast<int>(c.get_int("substeps", s.substeps));
    s.master_seed = static_cast<std::uint64_t>(c.get_int("master_seed", static_cast<std::int64_t>(s.master_seed)));
    s.threads = static_cast<int>(c.get_int("threads", s.threads));
    s.M = static_cast<int>(c.get_int("M", s.M));
    s.with_stderr = c.get_bool("stderr", s.with_stderr);
    if (c.has("tables")) {
        s.tables = split(c.get_string("tables", ""), ',');
    }
    s.validate();
    return s;
}

std::string returns_csv(const PathBundle& path)
{
    std::string out = path.variance_path ? "index,log_return,variance\n" : "index,log_return\n";
    const auto& y = path.returns.values;
    for (std::size_t i = 0; i < y.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += g17(y[i]);
        if (path.variance_path) {
            out += ',';
            out += g17((*path.variance_path)[i]);
        }
        out += '\n';
    }
    return out;
}

ReturnSeries read_returns_csv(const std::string& path, double h)
{
    ReturnSeries s{h, column(path, {"log_return", "return", "y"}, false)};
    validate_series(s);
    return s;
}

std::vector<double> read_prices_csv(const std::string& path)
{
    return column(path, {"price", "close", "S"}, true);
}

} // namespace svmm
