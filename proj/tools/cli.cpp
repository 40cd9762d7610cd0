#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace aivsim::cli {

using allocation::Scenario;
using sim::Metrics;

namespace {

std::vector<Scenario> parse_scenarios(const std::string& text) {
    std::vector<Scenario> out;
    if (text == "all") {
        return allocation::all_scenarios();
    }
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            const auto s = allocation::parse_scenario(part);
            if (std::find(out.begin(), out.end(), s) == out.end()) {
                out.push_back(s);
            }
        } catch (const std::invalid_argument& e) {
            throw sim::ConfigError("scenario", e.what());
        }
    }
    if (out.empty()) {
        throw sim::ConfigError("scenario", "no scenario given");
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string rounded(double v) { return std::to_string(static_cast<long long>(std::llround(v))); }

/// One scalar or per-agent quantity pulled out of a run.
struct Column {
    std::string key;    // csv / json name
    std::string label;  // table row label
    bool per_agent = false;
    bool percent = false;
    std::vector<double> (*get)(const Metrics&);
};

template <typename T>
std::vector<double> as_doubles(const std::vector<T>& v) {
    return {v.begin(), v.end()};
}

const std::vector<Column>& columns() {
    static const std::vector<Column> cols{
        {"max_pending", "Maximum nb of pending bags", false, false,
         [](const Metrics& m) { return std::vector<double>{double(m.max_pending)}; }},
        {"sim_time_s", "Simulation time (s)", false, false,
         [](const Metrics& m) { return std::vector<double>{m.sim_time_s}; }},
        {"avg_mission_time_s", "Average mission time per AIV (s)", true, false,
         [](const Metrics& m) { return m.avg_mission_time_s; }},
        {"missions", "Nb of missions completed by AIV", true, false,
         [](const Metrics& m) { return as_doubles(m.missions_per_aiv); }},
        {"work_rate", "Work rate per AIV (%)", true, true,
         [](const Metrics& m) { return m.work_rate_per_aiv; }},
        {"recharge_time_s", "Recharge time (s)", false, false,
         [](const Metrics& m) { return std::vector<double>{m.recharge_time_s}; }},
        {"recharge_wait_s", "Waiting time for recharges (s)", false, false,
         [](const Metrics& m) { return std::vector<double>{m.recharge_wait_s}; }},
        {"n_recharges", "Nb of recharges", false, false,
         [](const Metrics& m) { return std::vector<double>{double(m.n_recharges)}; }},
        {"recharges", "Nb of recharges per AIV", true, false,
         [](const Metrics& m) { return as_doubles(m.recharges_per_aiv); }},
        {"faults", "Faults", false, false,
         [](const Metrics& m) { return std::vector<double>{double(m.faults)}; }},
    };
    return cols;
}

/// Element-wise median/min/max of a column across runs.
struct Summary {
    std::vector<double> med, lo, hi;
};

Summary summarize(const Column& col, const std::vector<const RunRecord*>& runs) {
    Summary s;
    if (runs.empty()) {
        return s;
    }
    const auto width = col.get(runs.front()->metrics).size();
    for (std::size_t i = 0; i < width; ++i) {
        std::vector<double> v;
        for (const auto* r : runs) {
            v.push_back(col.get(r->metrics).at(i));
        }
        s.med.push_back(median(v));
        s.lo.push_back(*std::min_element(v.begin(), v.end()));
        s.hi.push_back(*std::max_element(v.begin(), v.end()));
    }
    return s;
}

std::map<Scenario, std::vector<const RunRecord*>> by_scenario(const std::vector<RunRecord>& runs) {
    std::map<Scenario, std::vector<const RunRecord*>> out;
    for (const auto& r : runs) {
        out[r.scenario].push_back(&r);
    }
    return out;
}

std::string table_cell(const Column& col, const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? " " : "") + rounded(col.percent ? 100.0 * v[i] : v[i]);
    }
    return s;
}

void write_config_comment(const RunRequest& req, std::ostream& out, const char* prefix) {
    std::istringstream cfg(sim::to_json(req.config, 2));
    std::string line;
    out << prefix << "resolved config (seed of replication r is seed + r):\n";
    while (std::getline(cfg, line)) {
        out << prefix << line << '\n';
    }
}

void write_table(const RunRequest& req, const std::vector<RunRecord>& runs, std::ostream& out) {
    write_config_comment(req, out, "# ");
    const auto groups = by_scenario(runs);
    std::vector<std::string> header{"Metric"};
    for (const auto& [s, rs] : groups) {
        header.push_back(allocation::to_string(s) + " " +
                         allocation::Strategy::for_scenario(s).label());
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& col : columns()) {
        std::vector<std::string> row{col.label};
        for (const auto& [s, rs] : groups) {
            row.push_back(table_cell(col, summarize(col, rs).med));
        }
        rows.push_back(row);
        if (req.replications > 1 && !col.per_agent) {
            std::vector<std::string> range{"  min-max"};
            for (const auto& [s, rs] : groups) {
                const auto sm = summarize(col, rs);
                range.push_back(table_cell(col, sm.lo) + "-" + table_cell(col, sm.hi));
            }
            rows.push_back(range);
        }
    }
    std::vector<std::string> done{"Completed runs"};
    for (const auto& [s, rs] : groups) {
        const auto n = std::count_if(rs.begin(), rs.end(), [](const auto* r) { return r->metrics.completed; });
        done.push_back(std::to_string(n) + "/" + std::to_string(rs.size()));
    }
    rows.push_back(done);

    std::vector<std::size_t> width(header.size(), 0);
    auto fit = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            width[i] = std::max(width[i], r[i].size());
        }
    };
    fit(header);
    for (const auto& r : rows) {
        fit(r);
    }
    auto emit = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << r[i];
        }
        out << '\n';
    };
    if (req.replications > 1) {
        out << "# medians over " << req.replications << " replications\n";
    }
    emit(header);
    for (const auto& r : rows) {
        emit(r);
    }
}

void csv_header(const RunRequest& req, std::ostream& out) {
    out << "scenario,replication,seed";
    for (const auto& col : columns()) {
        if (col.per_agent) {
            for (int i = 0; i < req.config.n_aivs; ++i) {
                out << ',' << col.key << '_' << i;
            }
        } else {
            out << ',' << col.key;
        }
    }
    out << ",completed\n";
}

void csv_values(const std::vector<double>& v, std::ostream& out) {
    for (const double x : v) {
        out << ',' << num(x);
    }
}

void write_csv(const RunRequest& req, const std::vector<RunRecord>& runs, std::ostream& out) {
    write_config_comment(req, out, "# ");
    if (req.compare) {
        out << "metric";
        const auto groups = by_scenario(runs);
        for (const auto& [s, rs] : groups) {
            out << ',' << allocation::to_string(s);
        }
        out << '\n';
        for (const auto& col : columns()) {
            const auto width = col.per_agent ? static_cast<std::size_t>(req.config.n_aivs) : 1;
            for (std::size_t i = 0; i < width; ++i) {
                out << col.key;
                if (col.per_agent) {
                    out << '_' << i;
                }
                for (const auto& [s, rs] : groups) {
                    out << ',' << num(summarize(col, rs).med.at(i));
                }
                out << '\n';
            }
        }
        return;
    }
    csv_header(req, out);
    for (const auto& [s, rs] : by_scenario(runs)) {
        for (const auto* r : rs) {
            out << allocation::to_string(r->scenario) << ',' << r->replication << ',' << r->seed;
            for (const auto& col : columns()) {
                csv_values(col.get(r->metrics), out);
            }
            out << ',' << (r->metrics.completed ? 1 : 0) << '\n';
        }
        out << allocation::to_string(s) << ",median,";
        for (const auto& col : columns()) {
            csv_values(summarize(col, rs).med, out);
        }
        const auto n = std::count_if(rs.begin(), rs.end(), [](const auto* r) { return r->metrics.completed; });
        out << ',' << num(static_cast<double>(n) / static_cast<double>(rs.size())) << '\n';
    }
}

void write_json(const RunRequest& req, const std::vector<RunRecord>& runs, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["config"] = nlohmann::ordered_json::parse(sim::to_json(req.config, -1));
    doc["replications"] = req.replications;
    auto values = [](const Column& col, const std::vector<double>& v) -> nlohmann::ordered_json {
        if (col.per_agent) {
            return v;
        }
        return v.at(0);
    };
    if (!req.compare) {
        doc["runs"] = nlohmann::ordered_json::array();
        for (const auto& r : runs) {
            nlohmann::ordered_json j;
            j["scenario"] = allocation::to_string(r.scenario);
            j["replication"] = r.replication;
            j["seed"] = r.seed;
            for (const auto& col : columns()) {
                j[col.key] = values(col, col.get(r.metrics));
            }
            j["completed"] = r.metrics.completed;
            doc["runs"].push_back(j);
        }
    }
    nlohmann::ordered_json agg;
    for (const auto& [s, rs] : by_scenario(runs)) {
        nlohmann::ordered_json j;
        for (const auto& col : columns()) {
            const auto sm = summarize(col, rs);
            j[col.key] = {{"median", values(col, sm.med)},
                          {"min", values(col, sm.lo)},
                          {"max", values(col, sm.hi)}};
        }
        agg[allocation::to_string(s)] = j;
    }
    doc["aggregates"] = agg;
    out << doc.dump(2) << '\n';
}

std::filesystem::path trace_path(const RunRequest& req, const RunRecord& r) {
    const auto& base = *req.trace;
    if (req.scenarios.size() == 1 && req.replications == 1) {
        return base;
    }
    auto p = base;
    p.replace_filename(base.stem().string() + "_" + allocation::to_string(r.scenario) + "_r" +
                       std::to_string(r.replication) + base.extension().string());
    return p;
}

}  // namespace

std::optional<RunRequest> parse_request(int argc, const char* const* argv) {
    CLI::App app{"Baggage-vehicle fleet simulator: auction allocation scenarios sc1..sc8"};
    app.set_version_flag("--version", "aivsim 0.1.0");

    std::string scenario_text;
    std::optional<std::uint64_t> seed;
    std::optional<int> bags, aivs;
    std::optional<double> dt;
    std::vector<std::string> sets;
    std::string config_file;
    std::string format = "table";
    std::string out, trace;
    RunRequest req;

    app.add_option("--scenario", scenario_text, "sc1..sc8, comma separated, or 'all'");
    app.add_option("--bags", bags, "Number of bags");
    app.add_option("--aivs", aivs, "Number of vehicles");
    app.add_option("--seed", seed, "Base seed; replication r uses seed + r");
    app.add_option("--dt", dt, "Tick length in seconds");
    app.add_option("--set", sets, "Override a config key, e.g. --set battery.discharge_per_m=1e-3")
        ->take_all();
    app.add_option("--replications", req.replications, "Runs per scenario")
        ->check(CLI::PositiveNumber);
    app.add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--format", format, "table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    app.add_option("--out", out, "Write the report here instead of stdout");
    app.add_option("--trace", trace, "Write the event log (NDJSON); one file per run");
    app.add_flag("--compare", req.compare, "Scenario-by-metric matrix (all scenarios by default)");
    app.add_option("--jobs", req.jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return std::nullopt;
    } catch (const CLI::CallForVersion&) {
        std::cout << "aivsim 0.1.0\n";
        return std::nullopt;
    }

    std::vector<sim::Override> overrides;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw sim::ConfigError(s, "expected key=value");
        }
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (bags) overrides.emplace_back("n_bags", std::to_string(*bags));
    if (aivs) overrides.emplace_back("n_aivs", std::to_string(*aivs));
    if (dt) {
        std::ostringstream os;
        os << std::setprecision(17) << *dt;
        overrides.emplace_back("dt", os.str());
    }
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) {
        file = config_file;
    }
    if (!scenario_text.empty()) {
        req.scenarios = parse_scenarios(scenario_text);
    }
    req.config = sim::load_config(file, overrides);
    if (req.scenarios.empty()) {
        req.scenarios = req.compare ? allocation::all_scenarios()
                                    : std::vector<Scenario>{req.config.scenario};
    }
    req.config.scenario = req.scenarios.front();
    req.format = format == "csv" ? Format::Csv : format == "json" ? Format::Json : Format::Table;
    if (!out.empty()) req.out = out;
    if (!trace.empty()) req.trace = trace;
    return req;
}

std::vector<RunRecord> execute(const RunRequest& req) {
    struct Job {
        Scenario scenario;
        int replication;
    };
    std::vector<Job> jobs;
    std::map<Scenario, std::shared_ptr<const sim::SimAssets>> assets;
    for (const auto s : req.scenarios) {
        auto cfg = req.config;
        cfg.scenario = s;
        assets[s] = sim::load_assets(cfg);
        for (int r = 0; r < req.replications; ++r) {
            jobs.push_back({s, r});
        }
    }
    std::vector<RunRecord> out(jobs.size());
    std::vector<std::string> traces(req.trace ? jobs.size() : 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const auto i = next.fetch_add(1);
            if (i >= jobs.size()) {
                return;
            }
            try {
                auto cfg = req.config;
                cfg.scenario = jobs[i].scenario;
                cfg.seed = req.config.seed + static_cast<std::uint64_t>(jobs[i].replication);
                auto result = sim::run(cfg, assets.at(jobs[i].scenario));
                out[i] = {jobs[i].scenario, jobs[i].replication, cfg.seed, std::move(result.metrics)};
                if (req.trace) {
                    traces[i] = result.log.to_ndjson();
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = jobs.size();
            }
        }
    };
    const auto n_threads = std::max(1, std::min<int>(req.jobs, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    if (req.trace) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto path = trace_path(req, out[i]);
            std::ofstream f(path, std::ios::binary);
            if (!f) {
                throw sim::ConfigError("trace", "cannot write " + path.string());
            }
            f << traces[i];
        }
    }
    return out;
}

void write_report(const RunRequest& req, const std::vector<RunRecord>& runs, std::ostream& out) {
    switch (req.format) {
        case Format::Table: write_table(req, runs, out); break;
        case Format::Csv: write_csv(req, runs, out); break;
        case Format::Json: write_json(req, runs, out); break;
    }
}

int run_and_report(const RunRequest& req, std::ostream& out, std::ostream& err) {
    const auto runs = execute(req);
    if (req.out) {
        std::ofstream f(*req.out, std::ios::binary);
        if (!f) {
            throw sim::ConfigError("out", "cannot write " + req.out->string());
        }
        write_report(req, runs, f);
    } else {
        write_report(req, runs, out);
    }
    int faulted = 0;
    int incomplete = 0;
    for (const auto& r : runs) {
        faulted += r.metrics.faults > 0;
        incomplete += !r.metrics.completed;
    }
    if (faulted || incomplete) {
        err << "aivsim: " << faulted << " run(s) with stranded vehicles, " << incomplete
            << " run(s) hit the wall limit\n";
        return kFaulted;
    }
    return kOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        const auto req = parse_request(argc, argv);
        if (!req) {
            return kOk;
        }
        return run_and_report(*req, out, err);
    } catch (const CLI::ParseError& e) {
        err << "aivsim: " << e.what() << '\n';
        return kConfigError;
    } catch (const sim::ConfigError& e) {
        err << "aivsim: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const fuzzy::ConfigError& e) {
        err << "aivsim: rule base error: " << e.what() << '\n';
        return kConfigError;
    } catch (const world::GraphError& e) {
        err << "aivsim: graph error: " << e.what() << '\n';
        return kRoutingError;
    } catch (const world::RoutingError& e) {
        err << "aivsim: routing error: " << e.what() << '\n';
        return kRoutingError;
    } catch (const std::exception& e) {
        err << "aivsim: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace aivsim::cli
