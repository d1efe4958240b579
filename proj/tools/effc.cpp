#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "effc/acceptance.hpp"
#include "effc/analytic.hpp"
#include "effc/dynamics.hpp"
#include "effc/excursions.hpp"
#include "effc/model.hpp"
#include "effc/oracle.hpp"
#include "effc/parallel.hpp"
#include "effc/partition.hpp"
#include "effc/rng.hpp"

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 suite failure.
enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kSuiteFail = 3 };

void emit_error(const std::string& kind, const std::string& message) {
    json err{{"schema_version", kSchemaVersion}, {"error", kind}, {"message", message}};
    std::cerr << err.dump() << "\n";
}

/// Config files are JSON objects; values for the active subcommand may be
/// nested under its name. Flags always take precedence (CLI11 semantics).
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        const json j = json::parse(input);
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

private:
    static void walk(const json& j, std::vector<std::string> parents,
                     std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                walk(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }

    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }
};

struct CommonOpts {
    double c = 1.0;
    double lambda = 0.2;
    std::int64_t n_max = 10000;
    double t_end = 100.0;
    std::uint64_t seed = 42;
};

void add_rates(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--c", o.c, "coalescence rate per pair")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda", o.lambda, "fragmentation rate per block")
        ->check(CLI::NonNegativeNumber);
}

void add_run(CLI::App* cmd, CommonOpts& o) {
    add_rates(cmd, o);
    cmd->add_option("--n-max", o.n_max, "ceiling block count standing in for infinity")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--t-end", o.t_end, "time horizon")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "RNG seed");
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

json params_header(const std::string& command, const effc::ModelParams& p) {
    return json{{"schema_version", kSchemaVersion},
                {"command", command},
                {"c", p.c},
                {"lambda", p.lambda},
                {"theta", p.theta()},
                {"regime", effc::to_string(effc::classify_regime(p))}};
}

int cmd_analytic(const CommonOpts& o, std::int64_t k_max) {
    const effc::ModelParams p(o.c, o.lambda);
    json out = params_header("analytic", p);
    const bool sub = effc::classify_regime(p) == effc::Regime::Subcritical && p.lambda > 0.0;
    json rows = json::array();
    for (std::int64_t k = 1; k <= k_max; ++k) {
        json row{{"k", k}, {"holding_time", effc::analytic::holding_time(p, k)}};
        if (sub) {
            row["rho"] = effc::analytic::stationary_pmf(p, k);
            row["hitting_from_infinity"] = effc::analytic::hitting_time_from_zero(p, k);
        }
        rows.push_back(std::move(row));
    }
    out["rows"] = std::move(rows);
    if (sub) {
        out["rho_1"] = effc::analytic::stationary_pmf(p, 1);
        out["tail_mass_beyond_k_max"] = effc::analytic::stationary_tail_mass(p, k_max);
        out["pgf_at_half"] = effc::analytic::stationary_pgf(p, 0.5);
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_simulate(const CommonOpts& o, std::int64_t initial, std::int64_t max_events,
                 const std::string& out_path) {
    const effc::ModelParams p(o.c, o.lambda);
    if (p.lambda == 0.0 && initial <= 1)
        throw std::runtime_error("nothing to simulate: lambda = 0 and no blocks to merge");
    effc::SplitMix64 rng(o.seed, 0);
    const auto traj =
        effc::dynamics::simulate_path(p, o.n_max, o.t_end, initial, rng, max_events);
    std::ofstream file;
    effc::dynamics::write_csv(traj, open_sink(out_path, file));
    if (traj.truncated) emit_error("truncated", "event budget exhausted before t_end");
    return kOk;
}

struct LevelStat {
    double mean = 0.0, se = 0.0;
    std::int64_t count = 0;
};

LevelStat level_stat(const std::vector<effc::excursions::ExcursionSummary>& excs, std::size_t idx,
                     double c, std::int64_t j) {
    double sum = 0, sumsq = 0;
    std::int64_t n = 0;
    for (const auto& e : excs) {
        if (!e.from_ceiling || std::isnan(e.phi[idx])) continue;
        const double r = c * static_cast<double>(j) * e.phi[idx] / 2.0;
        sum += r;
        sumsq += r * r;
        ++n;
    }
    LevelStat s;
    s.count = n;
    if (n > 0) s.mean = sum / static_cast<double>(n);
    if (n > 1)
        s.se = std::sqrt(std::max(0.0, sumsq / static_cast<double>(n) - s.mean * s.mean) /
                         static_cast<double>(n - 1));
    return s;
}

int cmd_excursions(const CommonOpts& o, const std::vector<std::int64_t>& j_window,
                   std::int64_t max_events, const std::string& csv_path) {
    const effc::ModelParams p(o.c, o.lambda);
    effc::excursions::ExcursionCollector collector(o.n_max, j_window);
    effc::SplitMix64 rng(o.seed, 0);
    std::int64_t events = 0;
    bool truncated = false;
    effc::dynamics::run_chain(
        p, o.n_max, o.t_end, o.n_max, rng,
        [&](double t, std::int64_t from, std::int64_t to, double d) {
            collector.on_jump(t, from, to, d);
            if (++events >= max_events) {
                truncated = true;
                return false;
            }
            return true;
        },
        [&](double t, std::int64_t last, double d) { collector.on_finish(t, last, d); });
    const auto& excs = collector.excursions();

    if (!csv_path.empty()) {
        std::ofstream file;
        auto& os = open_sink(csv_path, file);
        os << "start,end,duration,min_state\n";
        for (const auto& e : excs)
            os << e.start_time << "," << e.end_time << "," << e.end_time - e.start_time << ","
               << e.min_state << "\n";
    }

    json out = params_header("excursions", p);
    out["n_max"] = o.n_max;
    out["t_end"] = o.t_end;
    out["seed"] = o.seed;
    out["truncated"] = truncated;
    out["excursion_count"] = excs.size();
    out["ceiling_time"] = collector.ceiling_time();
    double exc_time = 0.0;
    std::int64_t clipped = 0;
    for (const auto& e : excs) {
        if (e.clipped) {
            ++clipped;
            continue;  // censored: excluded from duration statistics
        }
        exc_time += e.end_time - e.start_time;
    }
    out["completed_excursion_time"] = exc_time;
    out["clipped_excursions"] = clipped;
    if (!j_window.empty()) {
        json levels = json::array();
        for (std::size_t i = 0; i < j_window.size(); ++i) {
            const auto s = level_stat(excs, i, p.c, j_window[i]);
            levels.push_back({{"j", j_window[i]},
                              {"mean_ratio", s.mean},
                              {"std_error", s.se},
                              {"count", s.count}});
        }
        std::int64_t excluded = 0;
        const std::int64_t j_min = *std::min_element(j_window.begin(), j_window.end());
        for (const auto& e : excs)
            if (e.from_ceiling && e.min_state > j_min) ++excluded;
        out["speed"] = {{"levels", std::move(levels)}, {"excluded", excluded}};
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_dimension(const CommonOpts& o, std::vector<double> scales, std::int64_t max_events,
                  const std::string& csv_path) {
    const effc::ModelParams p(o.c, o.lambda);
    if (scales.empty())
        for (int i = 0; i <= 24; ++i) scales.push_back(std::pow(10.0, 2.0 - 0.25 * i));
    effc::excursions::ExcursionCollector collector(o.n_max);
    effc::SplitMix64 rng(o.seed, 0);
    std::int64_t events = 0;
    bool truncated = false;
    effc::dynamics::run_chain(
        p, o.n_max, o.t_end, o.n_max, rng,
        [&](double t, std::int64_t from, std::int64_t to, double d) {
            collector.on_jump(t, from, to, d);
            if (++events >= max_events) {
                truncated = true;
                return false;
            }
            return true;
        },
        [&](double t, std::int64_t last, double d) { collector.on_finish(t, last, d); });
    const auto est =
        effc::excursions::box_dimension_from_intervals(collector.ceiling_intervals(), scales);

    if (!csv_path.empty()) {
        std::ofstream file;
        auto& os = open_sink(csv_path, file);
        os << "delta,count\n";
        for (std::size_t i = 0; i < est.scales.size(); ++i)
            os << est.scales[i] << "," << est.counts[i] << "\n";
    }

    json out = params_header("dimension", p);
    out["n_max"] = o.n_max;
    out["t_end"] = o.t_end;
    out["seed"] = o.seed;
    out["truncated"] = truncated;
    out["slope"] = est.slope;
    out["ci"] = est.ci;
    out["r2"] = est.r2;
    out["degenerate"] = est.degenerate;
    json table = json::array();
    for (std::size_t i = 0; i < est.scales.size(); ++i)
        table.push_back({{"delta", est.scales[i]}, {"count", est.counts[i]}});
    out["table"] = std::move(table);
    std::cout << out.dump(2) << "\n";
    return est.degenerate ? kNumerical : kOk;
}

int cmd_hitting(const CommonOpts& o, std::int64_t target, std::int64_t replicas) {
    const effc::ModelParams p(o.c, o.lambda);
    if (target < 1 || target >= o.n_max)
        throw std::invalid_argument("require 1 <= target < n-max");
    const auto times = effc::replica_map(replicas, [&](std::int64_t i) {
        effc::SplitMix64 rng(o.seed, static_cast<std::uint64_t>(i));
        return effc::dynamics::simulate_descent(p, o.n_max, target, o.n_max, rng).total_time;
    });
    double sum = 0, sumsq = 0;
    for (double t : times) {
        sum += t;
        sumsq += t * t;
    }
    const double n = static_cast<double>(replicas);
    const double mean = sum / n;
    const double se =
        replicas > 1 ? std::sqrt(std::max(0.0, sumsq / n - mean * mean) / (n - 1.0)) : 0.0;

    json out = params_header("hitting", p);
    out["n_max"] = o.n_max;
    out["target"] = target;
    out["replicas"] = replicas;
    out["seed"] = o.seed;
    out["mc_mean"] = mean;
    out["mc_std_error"] = se;
    if (p.lambda > 0.0) {
        const auto h = effc::oracle::exact_hitting_times(
            effc::oracle::build_generator(p, o.n_max), target);
        out["oracle_from_ceiling"] = h(h.size() - 1);
    }
    if (effc::classify_regime(p) == effc::Regime::Subcritical && p.lambda > 0.0)
        out["limit_from_infinity"] = effc::analytic::hitting_time_from_zero(p, target);
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_oracle(const CommonOpts& o, std::int64_t K, std::int64_t head,
               std::optional<std::int64_t> target) {
    const effc::ModelParams p(o.c, o.lambda);
    const auto gen = effc::oracle::build_generator(p, K);
    json out = params_header("oracle", p);
    out["K"] = K;
    const Eigen::VectorXd pi = effc::oracle::stationary_solve(gen);
    out["mass_at_1"] = pi(0);
    json rows = json::array();
    for (std::int64_t k = 1; k <= std::min(head, K); ++k)
        rows.push_back({{"k", k}, {"pi", pi(k - 1)}});
    out["stationary_head"] = std::move(rows);
    if (effc::classify_regime(p) == effc::Regime::Subcritical && p.lambda > 0.0) {
        Eigen::VectorXd rho = effc::analytic::stationary_pmf_vector(p, K).pmf;
        rho /= rho.sum();
        out["tv_to_analytic"] = 0.5 * (pi - rho).cwiseAbs().sum();
    }
    if (target) {
        const auto h = effc::oracle::exact_hitting_times(gen, *target);
        out["hitting_target"] = *target;
        out["hitting_from_K"] = h(h.size() - 1);
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_validate(const std::string& suite, std::uint64_t seed) {
    const auto results = effc::acceptance::run_suite(suite, seed);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  (" << r.description << ") ["
                  << r.seconds << " s] " << r.detail << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "suite passed" : "suite FAILED") << "\n";
    return all_pass ? kOk : kSuiteFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fast fragmentation-coalescence toolkit"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; flags take precedence");

    CommonOpts o;
    std::function<int()> action;

    auto* analytic = app.add_subcommand("analytic", "closed-form tables");
    {
        add_rates(analytic, o);
        auto k_max = std::make_shared<std::int64_t>(20);
        analytic->add_option("--k-max", *k_max, "rows to print")->check(CLI::PositiveNumber);
        analytic->callback([&o, k_max, &action] {
            action = [&o, k_max] { return cmd_analytic(o, *k_max); };
        });
    }

    auto* simulate = app.add_subcommand("simulate", "trajectory CSV of the block-count chain");
    {
        add_run(simulate, o);
        auto initial = std::make_shared<std::int64_t>(-1);
        auto max_events = std::make_shared<std::int64_t>(10000000);
        auto out_path = std::make_shared<std::string>();
        simulate->add_option("--initial", *initial, "initial state (default: n-max)");
        simulate->add_option("--max-events", *max_events)->check(CLI::PositiveNumber);
        simulate->add_option("--out", *out_path, "CSV path (default: stdout)");
        simulate->callback([&o, initial, max_events, out_path, &action] {
            action = [&o, initial, max_events, out_path] {
                return cmd_simulate(o, *initial < 0 ? o.n_max : *initial, *max_events, *out_path);
            };
        });
    }

    auto* excursions = app.add_subcommand("excursions", "excursion table and speed statistics");
    {
        add_run(excursions, o);
        auto j_window = std::make_shared<std::vector<std::int64_t>>();
        auto max_events = std::make_shared<std::int64_t>(1000000000);
        auto csv_path = std::make_shared<std::string>();
        excursions->add_option("--j-window", *j_window, "levels for the speed statistic")
            ->delimiter(',');
        excursions->add_option("--max-events", *max_events)->check(CLI::PositiveNumber);
        excursions->add_option("--csv", *csv_path, "excursion table path");
        excursions->callback([&o, j_window, max_events, csv_path, &action] {
            action = [&o, j_window, max_events, csv_path] {
                return cmd_excursions(o, *j_window, *max_events, *csv_path);
            };
        });
    }

    auto* dimension = app.add_subcommand("dimension", "box-counting dimension of the zero set");
    {
        add_run(dimension, o);
        auto scales = std::make_shared<std::vector<double>>();
        auto max_events = std::make_shared<std::int64_t>(4000000000LL);
        auto csv_path = std::make_shared<std::string>();
        dimension->add_option("--scales", *scales, "box sizes (default: 10^2..10^-4)")
            ->delimiter(',');
        dimension->add_option("--max-events", *max_events)->check(CLI::PositiveNumber);
        dimension->add_option("--csv", *csv_path, "delta,count table path");
        dimension->callback([&o, scales, max_events, csv_path, &action] {
            action = [&o, scales, max_events, csv_path] {
                return cmd_dimension(o, *scales, *max_events, *csv_path);
            };
        });
    }

    auto* hitting = app.add_subcommand("hitting", "first hitting time of a target state");
    {
        add_run(hitting, o);
        auto target = std::make_shared<std::int64_t>(10);
        auto replicas = std::make_shared<std::int64_t>(100);
        hitting->add_option("--target", *target, "block count to hit")->check(CLI::PositiveNumber);
        hitting->add_option("--replicas", *replicas)->check(CLI::PositiveNumber);
        hitting->callback([&o, target, replicas, &action] {
            action = [&o, target, replicas] { return cmd_hitting(o, *target, *replicas); };
        });
    }

    auto* oracle = app.add_subcommand("oracle", "exact truncated-chain computations");
    {
        add_rates(oracle, o);
        auto K = std::make_shared<std::int64_t>(500);
        auto head = std::make_shared<std::int64_t>(10);
        auto target = std::make_shared<std::int64_t>(0);
        oracle->add_option("--K", *K, "truncation level")->check(CLI::Range(std::int64_t{2}, std::int64_t{10000000}));
        oracle->add_option("--head", *head, "stationary entries to print");
        oracle->add_option("--target", *target, "also report hitting time of this state");
        oracle->callback([&o, K, head, target, &action] {
            action = [&o, K, head, target] {
                return cmd_oracle(o, *K, *head,
                                  *target > 0 ? std::optional<std::int64_t>(*target) : std::nullopt);
            };
        });
    }

    auto* validate = app.add_subcommand("validate", "run the verification suite");
    {
        auto suite = std::make_shared<std::string>("quick");
        auto seed = std::make_shared<std::uint64_t>(42);
        validate->add_option("--suite", *suite)->check(CLI::IsMember({"quick", "full"}));
        validate->add_option("--seed", *seed);
        validate->callback([suite, seed, &action] {
            action = [suite, seed] { return cmd_validate(*suite, *seed); };
        });
    }

    try {
        app.parse(argc, argv);
        return action();
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return kUsage;
    } catch (const std::invalid_argument& e) {
        emit_error("usage", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        emit_error("numerical", e.what());
        return kNumerical;
    }
}
