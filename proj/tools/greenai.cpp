/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The greenai authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: sweeps, single trials and scenario dumps.

#include <greenai/greenai.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto t = greenai::detail::trim(cell);
        if (!t.empty()) out.push_back(greenai::detail::parse_number<double>("--values", t));
    }
    return out;
}

std::vector<greenai::Algorithm> parse_algorithms(const std::string& csv) {
    std::vector<greenai::Algorithm> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (auto t = greenai::detail::trim(cell); !t.empty()) out.push_back(greenai::parse_algorithm(t));
    return out;
}

greenai::ScenarioConfig load_or_default(const std::string& path) {
    return path.empty() ? greenai::ScenarioConfig{} : greenai::load_config(path);
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
    std::ofstream out(path);
    if (!out) throw greenai::IoError("cannot open '" + path + "' for writing");
    fn(out);
    if (!out) throw greenai::IoError("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficient NOMA resource allocation for UAV-relayed IoT uplinks"};
    app.require_subcommand(1);

    std::string config_path, sweep = "p_f", values, algos = "green_ai,greedy", out_path;
    int trials = 100, threads = 0;
    std::uint64_t seed = 0;
    int fixed_u = 0;

    auto* run = app.add_subcommand("run", "Monte Carlo sweep, written as CSV");
    run->add_option("--config", config_path, "Scenario config file (key = value)")->check(CLI::ExistingFile);
    run->add_option("--sweep", sweep, "Swept variable: p_f, bt or K")->check(CLI::IsMember({"p_f", "bt", "bt_target", "K"}));
    run->add_option("--values", values, "Comma-separated values (default grid if omitted)");
    run->add_option("--trials", trials, "Trials per value")->check(CLI::PositiveNumber);
    auto* seed_opt = run->add_option("--seed", seed, "Base seed (overrides the config)");
    run->add_option("--algos", algos, "Comma-separated subset of green_ai,greedy,exhaustive");
    run->add_option("--out", out_path, "Output CSV path")->required();
    run->add_option("--threads", threads, "Worker threads (0: all cores)");
    auto* u_opt = run->add_option("--fixed-u", fixed_u, "Force the devices-per-subcarrier cap")->check(CLI::PositiveNumber);

    std::string algo = "green_ai", solution_path, allocation_path;
    auto* trial = app.add_subcommand("trial", "Single trial; prints a JSON summary");
    trial->add_option("--config", config_path, "Scenario config file")->check(CLI::ExistingFile);
    auto* trial_seed_opt = trial->add_option("--seed", seed, "Trial seed (overrides the config)");
    trial->add_option("--algo", algo, "green_ai, greedy or exhaustive");
    trial->add_option("--solution", solution_path, "Write per-pair rates and powers as CSV");
    trial->add_option("--allocation", allocation_path, "Write the subcarrier assignment as CSV");

    auto* dump = app.add_subcommand("realization", "Dump a scenario realization as CSV");
    dump->add_option("--config", config_path, "Scenario config file")->check(CLI::ExistingFile);
    auto* dump_seed_opt = dump->add_option("--seed", seed, "Seed (overrides the config)");
    dump->add_option("--out", out_path, "Output path")->required();

    app.add_subcommand("config", "Print the default config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            greenai::SweepSpec spec;
            spec.base = load_or_default(config_path);
            if (*seed_opt) spec.base.seed = seed;
            spec.variable = greenai::parse_sweep_variable(sweep);
            spec.values = values.empty() ? greenai::default_sweep_values(spec.variable) : parse_values(values);
            spec.trials = trials;
            spec.algorithms = parse_algorithms(algos);
            spec.threads = threads;
            if (*u_opt) spec.options.fixed_u = fixed_u;
            const auto result = greenai::run_sweep(spec);
            greenai::save_sweep_csv(out_path, result);
        } else if (*trial) {
            auto config = load_or_default(config_path);
            if (*trial_seed_opt) config.seed = seed;
            const auto res = greenai::run_trial(config, greenai::parse_algorithm(algo), config.seed);
            if (!solution_path.empty())
                write_file(solution_path, [&](std::ostream& o) { greenai::write_solution_csv(o, res.solution, res.alloc); });
            if (!allocation_path.empty())
                write_file(allocation_path, [&](std::ostream& o) { greenai::write_allocation_csv(o, res.alloc); });
            std::cout << greenai::solution_summary(res.solution).dump(2) << '\n';
        } else if (*dump) {
            auto config = load_or_default(config_path);
            if (*dump_seed_opt) config.seed = seed;
            const auto r = greenai::make_realization(config);
            write_file(out_path, [&](std::ostream& o) { greenai::write_realization_csv(o, r); });
        } else {
            greenai::write_config(std::cout, greenai::ScenarioConfig{});
        }
    } catch (const greenai::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const greenai::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 3;
    } catch (const greenai::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
