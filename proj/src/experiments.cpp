#include <svmm/experiments.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include <svmm/asymptotics.hpp>
#include <svmm/estimate.hpp>
#include <svmm/simulate.hpp>

namespace svmm {

namespace {

std::string g17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Replication run_one(const NamedSetting& s, std::int64_t n, double h, std::uint64_t stream, const ExperimentSpec& spec)
{
    Replication r;
    SimulationOptions opt;
    opt.replication = stream;
    const auto path = simulate(model::Heston{s.params}, SamplingGrid{h, n, spec.substeps}, spec.master_seed, opt);
    EstimatorConfig cfg;
    cfg.M = spec.M;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (spec.with_stderr) {
            const auto e = mm_estimate_with_stderr(path.returns, cfg);
            r.estimate = to_array(e.params);
            r.stderr_ = to_array(*e.stderr_);
        } else {
            r.estimate = to_array(mm_estimate(path.returns, cfg).params);
        }
        r.ok = true;
    } catch (const Error& e) {
        r.error = std::string(error_name(e.code()));
    }
    r.estimate_seconds = seconds_since(t0);
    return r;
}

} // namespace

const std::vector<NamedSetting>& builtin_settings()
{
    static const std::vector<NamedSetting> all = {
        {"S0", {0.125, 0.1, 0.25, 0.1, -0.7}}, {"S1", {0.4, 0.1, 0.25, 0.1, -0.7}},
        {"S2", {0.125, 0.03, 0.25, 0.1, -0.7}}, {"S3", {0.125, 0.1, 0.5, 0.1, -0.7}},
        {"S4", {0.125, 0.1, 0.25, 0.2, -0.7}}, {"S5", {0.125, 0.1, 0.25, 0.1, -0.3}},
    };
    return all;
}

NamedSetting builtin_setting(const std::string& name)
{
    for (const auto& s : builtin_settings()) {
        if (s.name == name) {
            return s;
        }
    }
    throw Error(Errc::ConfigError, "unknown built-in setting " + name);
}

void ExperimentSpec::validate() const
{
    if (settings.empty() || N_list.empty() || h_list.empty()) {
        throw Error(Errc::ConfigError, "settings, N list and h list must be non-empty");
    }
    if (M < 2 || M > 10) {
        throw Error(Errc::ConfigError, "M must be between 2 and 10");
    }
    if (replications < 2) {
        throw Error(Errc::ConfigError, "need at least 2 replications");
    }
    for (const auto& s : settings) {
        (void)svmm::validate(s.params);
    }
    for (auto n : N_list) {
        validate_grid(SamplingGrid{1.0, n, substeps});
    }
    for (double h : h_list) {
        validate_grid(SamplingGrid{h, 3, substeps});
    }
    for (const auto& t : tables) {
        if (t != "grid" && t != "scaling") {
            throw Error(Errc::ConfigError, "unknown table " + t);
        }
    }
}

ExperimentSpec paper_scale(ExperimentSpec spec)
{
    spec.replications = 400;
    if (spec.N_list.size() == 1) {
        spec.N_list = {400000};
    }
    return spec;
}

ParamArray to_array(const HestonParams& p) { return {p.mu, p.k, p.theta, p.sigma_v, p.rho}; }

void summarize(CellReport& cell)
{
    cell.replications = static_cast<int>(cell.runs.size());
    cell.n_failed = 0;
    ParamArray sum{}, sq{};
    double secs = 0.0;
    int ok = 0;
    for (const auto& r : cell.runs) {
        secs += r.estimate_seconds;
        if (!r.ok) {
            ++cell.n_failed;
            continue;
        }
        ++ok;
        for (std::size_t j = 0; j < 5; ++j) {
            sum[j] += r.estimate[j];
        }
    }
    cell.mean_estimate_seconds = cell.runs.empty() ? 0.0 : secs / cell.runs.size();
    for (std::size_t j = 0; j < 5; ++j) {
        cell.mean[j] = ok ? sum[j] / ok : std::nan("");
    }
    for (const auto& r : cell.runs) {
        if (r.ok) {
            for (std::size_t j = 0; j < 5; ++j) {
                sq[j] += (r.estimate[j] - cell.mean[j]) * (r.estimate[j] - cell.mean[j]);
            }
        }
    }
    for (std::size_t j = 0; j < 5; ++j) {
        cell.std[j] = ok > 1 ? std::sqrt(sq[j] / (ok - 1)) : 0.0;
    }
}

ReportTable run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ReportTable table;
    for (const auto& s : spec.settings) {
        for (auto n : spec.N_list) {
            for (double h : spec.h_list) {
                CellReport c;
                c.setting = s.name;
                c.truth = s.params;
                c.n = n;
                c.h = h;
                c.runs.resize(static_cast<std::size_t>(spec.replications));
                table.rows.push_back(std::move(c));
            }
        }
    }

    struct Job {
        std::size_t cell;
        int rep;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < table.rows.size(); ++c) {
        for (int r = 0; r < spec.replications; ++r) {
            jobs.push_back({c, r});
        }
    }
    std::vector<double> cell_time(table.rows.size(), 0.0);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto& job = jobs[j];
            auto& cell = table.rows[job.cell];
            const auto& setting = spec.settings[job.cell / (spec.N_list.size() * spec.h_list.size())];
            const std::uint64_t stream = (static_cast<std::uint64_t>(job.cell) << 32) | static_cast<std::uint32_t>(job.rep);
            auto rep = run_one(setting, cell.n, cell.h, stream, spec);
            rep.index = job.rep;
            cell.runs[static_cast<std::size_t>(job.rep)] = std::move(rep);
        }
    };
    int threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    const auto run_start = std::chrono::steady_clock::now();
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    const double run_time = seconds_since(run_start);

    for (auto& cell : table.rows) {
        summarize(cell);
        // threads share cells, so wall time is apportioned by replication count
        cell.wall_time = run_time / table.rows.size();
        if (cell.n_failed == cell.replications) {
            throw Error(Errc::AllReplicationsFailed, "every replication failed for " + cell.setting + " N="
                                                         + std::to_string(cell.n) + " h=" + g17(cell.h));
        }
    }
    table.wall_time = seconds_since(t0);
    return table;
}

std::vector<ScalingRow> scaling_analysis(const ReportTable& table)
{
    std::map<std::pair<std::string, double>, std::vector<const CellReport*>> groups;
    std::vector<std::pair<std::string, double>> order;
    for (const auto& c : table.rows) {
        const auto key = std::make_pair(c.setting, c.h);
        if (!groups.count(key)) {
            order.push_back(key);
        }
        groups[key].push_back(&c);
    }
    std::vector<ScalingRow> out;
    for (const auto& key : order) {
        auto cells = groups[key];
        std::stable_sort(cells.begin(), cells.end(), [](auto a, auto b) { return a->n < b->n; });
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
            const auto& a = *cells[i];
            const auto& b = *cells[i + 1];
            for (std::size_t j = 0; j < 5; ++j) {
                ScalingRow r;
                r.setting = key.first;
                r.h = key.second;
                r.n_from = a.n;
                r.n_to = b.n;
                r.parameter = kParamNames[j];
                r.expected = std::sqrt(static_cast<double>(b.n) / static_cast<double>(a.n));
                r.degenerate = a.n == b.n || !(a.std[j] > 0.0) || !(b.std[j] > 0.0);
                r.ratio = b.std[j] > 0.0 ? a.std[j] / b.std[j] : std::nan("");
                r.flagged = r.degenerate || r.ratio > 1.6 * r.expected || r.ratio < r.expected / 1.6;
                out.push_back(r);
            }
        }
    }
    return out;
}

std::string format_mean_std(double mean, double std)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f±%.3f", mean, std);
    std::string s = buf;
    // trailing zeros are stripped ("0.1±0.019")
    const auto strip = [](std::string part) {
        if (part.find('.') != std::string::npos) {
            while (part.back() == '0') {
                part.pop_back();
            }
            if (part.back() == '.') {
                part.pop_back();
            }
        }
        return part == "-0" ? std::string("0") : part;
    };
    const auto pm = s.find("±");
    return strip(s.substr(0, pm)) + "±" + strip(s.substr(pm + std::string("±").size()));
}

std::string grid_csv(const ReportTable& table)
{
    std::ostringstream os;
    os << "setting,N,h,replications,n_failed";
    for (auto name : kParamNames) {
        os << ',' << name << "_true," << name << "_mean," << name << "_std";
    }
    os << '\n';
    for (const auto& c : table.rows) {
        const auto truth = to_array(c.truth);
        os << c.setting << ',' << c.n << ',' << g17(c.h) << ',' << c.replications << ',' << c.n_failed;
        for (std::size_t j = 0; j < 5; ++j) {
            os << ',' << g17(truth[j]) << ',' << g17(c.mean[j]) << ',' << g17(c.std[j]);
        }
        os << '\n';
    }
    return os.str();
}

std::string scaling_csv(const std::vector<ScalingRow>& rows)
{
    std::ostringstream os;
    os << "setting,h,N_from,N_to,parameter,ratio,expected,flagged,degenerate\n";
    for (const auto& r : rows) {
        os << r.setting << ',' << g17(r.h) << ',' << r.n_from << ',' << r.n_to << ',' << r.parameter << ','
           << g17(r.ratio) << ',' << g17(r.expected) << ',' << (r.flagged ? 1 : 0) << ',' << (r.degenerate ? 1 : 0)
           << '\n';
    }
    return os.str();
}

std::string summary_text(const ReportTable& table)
{
    std::ostringstream os;
    os << "setting  N        h     mu              k               theta           sigma_v         rho             failed\n";
    for (const auto& c : table.rows) {
        char head[64];
        std::snprintf(head, sizeof head, "%-8s %-8lld %-5g ", c.setting.c_str(), static_cast<long long>(c.n), c.h);
        os << head;
        for (std::size_t j = 0; j < 5; ++j) {
            char cellbuf[40];
            std::snprintf(cellbuf, sizeof cellbuf, "%-16s", format_mean_std(c.mean[j], c.std[j]).c_str());
            os << cellbuf;
        }
        os << c.n_failed << '/' << c.replications << '\n';
    }
    char tail[128];
    std::snprintf(tail, sizeof tail, "total wall time %.2f s\n", table.wall_time);
    os << tail;
    for (const auto& c : table.rows) {
        char line[128];
        std::snprintf(line, sizeof line, "estimation time %s N=%lld h=%g: %.4f s per replication\n", c.setting.c_str(),
                      static_cast<long long>(c.n), c.h, c.mean_estimate_seconds);
        os << line;
    }
    return os.str();
}

} // namespace svmm
