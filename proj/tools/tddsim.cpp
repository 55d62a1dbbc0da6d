#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tddsim/engine.hpp"
#include "tddsim/output.hpp"
#include "tddsim/scenario.hpp"
#include "tddsim/sweep.hpp"
#include "tddsim/testing/checks.hpp"

namespace {

// Exit codes.
enum Exit : int {
    kOk = 0,
    kUsage = 2,
    kScenario = 3,
    kSimulation = 4,
    kIo = 5,
    kSelftest = 6,
};

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int guarded(const std::function<int()>& body)
{
    try {
        return body();
    } catch (const tddsim::ScenarioError& e) {
        std::cerr << "scenario: " << e.what() << '\n';
        return kScenario;
    } catch (const tddsim::SimulationError& e) {
        std::cerr << "simulation: " << e.what() << '\n';
        return kSimulation;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io: " << e.what() << '\n';
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "simulation: " << e.what() << '\n';
        return kSimulation;
    }
}

void print_quantiles(const tddsim::RunResult& r)
{
    const auto sorted = r.sorted_latencies();
    std::cout << policy_name(r.scenario.policy()) << ": " << sorted.size() << " packets, drop rate "
              << r.drop_rate() << '\n';
    if (sorted.empty()) return;
    for (double q : r.scenario.quantile_targets) {
        const auto e = tddsim::quantile(sorted, q);
        std::cout << "  q=" << q << "  " << e.value << " ms  [" << e.lower << ", " << e.upper << "]"
                  << (e.insufficient_support ? "  (insufficient tail support)" : "") << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slot-level simulator of a coordinated TDD macro cluster"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("--scenario", scenario_path, "Scenario file (key = value)")->required();
    run->add_option("--set", overrides, "Override, key=value (repeatable)");
    run->add_option("--out", out_dir, "Result directory")->required();

    std::string axis;
    int reps = 1;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* sw = app.add_subcommand("sweep", "Sweep one scenario key");
    sw->add_option("--scenario", scenario_path, "Scenario file (key = value)")->required();
    sw->add_option("--set", overrides, "Override, key=value (repeatable)");
    sw->add_option("--axis", axis, "key=v1,v2,...")->required();
    sw->add_option("--reps", reps, "Replications per point")->check(CLI::PositiveNumber);
    sw->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sw->add_option("--out", out_dir, "Result directory")->required();

    auto* st = app.add_subcommand("selftest", "Run the built-in oracle and property checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*run) {
        return guarded([&] {
            const auto s = tddsim::load_scenario(read_file(scenario_path), overrides);
            const auto r = tddsim::run(s);
            tddsim::write_run(out_dir, r);
            print_quantiles(r);
            return kOk;
        });
    }
    if (*sw) {
        return guarded([&] {
            const auto eq = axis.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("--axis must be key=v1,v2,...");
            const auto s = tddsim::load_scenario(read_file(scenario_path), overrides);
            const std::string key = axis.substr(0, eq);
            const auto values = tddsim::parse_axis_values(axis.substr(eq + 1));
            const auto points = tddsim::sweep(s, key, values, reps, threads);
            tddsim::write_sweep(out_dir, key, points);
            int failed = 0;
            for (const auto& p : points) {
                std::cout << key << '=' << p.value << ": ";
                if (p.result) {
                    std::cout << '\n';
                    print_quantiles(*p.result);
                } else {
                    std::cout << "FAILED " << p.error << '\n';
                    ++failed;
                }
            }
            return failed == 0 ? kOk : kSimulation;
        });
    }
    if (*st) {
        return guarded([&] {
            using namespace tddsim::checks;
            bool ok = true;
            for (const auto& c : {pipeline_matches_oracle(), anchor_points(), numerical_properties()}) {
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
                ok = ok && c.pass;
            }
            return ok ? kOk : kSelftest;
        });
    }
    return kUsage;
}
