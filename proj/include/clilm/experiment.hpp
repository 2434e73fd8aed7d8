#pragma once

// Two-stage experiment runner. For each scenario it simulates epidemics
// from the spatial ILM, tunes beta0 by grid-search maximum likelihood on
// every dataset (stage 1), then fits both the spatial ILM and the CL-ILM
// by adaptive MCMC on a subset and scores them with posterior predictive
// checks (stage 2). Emits per-dataset artefacts plus summary tables of
// selection proportions, MSE/SD and coverage. Reruns with the same base
// seed produce byte-identical reports.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clilm/binary_table.hpp"
#include "clilm/csv.hpp"
#include "clilm/mcmc.hpp"
#include "clilm/parallel.hpp"
#include "clilm/population.hpp"
#include "clilm/ppc.hpp"
#include "clilm/simulate.hpp"
#include "clilm/tune.hpp"

namespace clilm {

struct ScenarioConfig {
    std::string name;
    IlmParams params;
    Compartments compartments;
    std::size_t n = 500;
    double side = 10.0;
    int t_end = 15;
    std::string grid = "-1,0.5:0.5:10";
};

struct ExperimentConfig {
    std::vector<ScenarioConfig> scenarios;
    int stage1 = 10;  // epidemics per scenario used for beta0 tuning
    int stage2 = 5;   // subset carried into MCMC fitting and PPC
    Transform transform = Transform::log;
    McmcSettings mcmc{6000, 1000, 5, 0};
    std::size_t ppc_replicates = 200;
    PpcReference reference = PpcReference::predictive_mean;
    std::size_t min_infected = 10;  // redraw threshold for dud epidemics
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::filesystem::path out_dir = "experiment_out";
};

namespace detail {

inline ScenarioConfig fmd_scenario(Framework framework) {
    // semi-real foot-and-mouth surrogate: published kernel parameters on a
    // synthetic 1101-farm population; the square side is chosen so those
    // parameters produce epidemics of plausible size and duration
    ScenarioConfig sc;
    sc.n = 1101;
    sc.side = 5.0;
    sc.t_end = 45;
    sc.grid = "-1,0.2:0.2:4";
    if (framework == Framework::si) {
        sc.name = "fmd_si";
        sc.params = {0.00096, 1.22};
        sc.compartments = {Framework::si, 0.0};
    } else {
        sc.name = "fmd_sir";
        sc.params = {0.002, 1.18};
        sc.compartments = {Framework::sir, 8.86};
    }
    return sc;
}

inline std::string scenario_label(double alpha, double beta, Framework fw) {
    std::ostringstream name;
    name << "alpha" << alpha << "_beta" << beta << "_" << to_string(fw);
    return name.str();
}

}  // namespace detail

// Flat key=value configuration. Unknown keys are rejected so typos fail
// loudly. Keys:
//   framework=si|sir            scenarios=0.7:4,0.5:3 (alpha:beta pairs)
//   n=, side=, t_end=, period_mean=, grid=, transform=identity|log
//   stage1=, stage2=, mcmc_iterations=, mcmc_burn_in=, mcmc_thin=
//   ppc_replicates=, reference=mean|observed, min_infected=
//   include_fmd=0|1, seed=, jobs=, out=
inline ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }

    ExperimentConfig cfg;
    Framework framework = Framework::si;
    double period_mean = 4.0;
    std::size_t n = 500;
    double side = 10.0;
    int t_end = 15;
    std::string grid = "-1,0.5:0.5:10";
    std::string scenarios = "0.7:4,0.5:3,0.2:4,0.9:5";
    bool include_fmd = false;

    for (const auto& [key, value] : kv) {
        if (key == "framework") {
            framework = framework_from_string(value);
        } else if (key == "scenarios") {
            scenarios = value;
        } else if (key == "n") {
            n = std::stoul(value);
        } else if (key == "side") {
            side = std::stod(value);
        } else if (key == "t_end") {
            t_end = std::stoi(value);
        } else if (key == "period_mean") {
            period_mean = std::stod(value);
        } else if (key == "grid") {
            grid = value;
        } else if (key == "transform") {
            cfg.transform = transform_from_string(value);
        } else if (key == "stage1") {
            cfg.stage1 = std::stoi(value);
        } else if (key == "stage2") {
            cfg.stage2 = std::stoi(value);
        } else if (key == "mcmc_iterations") {
            cfg.mcmc.iterations = std::stoul(value);
        } else if (key == "mcmc_burn_in") {
            cfg.mcmc.burn_in = std::stoul(value);
        } else if (key == "mcmc_thin") {
            cfg.mcmc.thin = std::stoul(value);
        } else if (key == "ppc_replicates") {
            cfg.ppc_replicates = std::stoul(value);
        } else if (key == "reference") {
            if (value == "mean") {
                cfg.reference = PpcReference::predictive_mean;
            } else if (value == "observed") {
                cfg.reference = PpcReference::observed;
            } else {
                throw std::runtime_error("reference must be 'mean' or 'observed'");
            }
        } else if (key == "min_infected") {
            cfg.min_infected = std::stoul(value);
        } else if (key == "include_fmd") {
            include_fmd = value == "1" || value == "true";
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "jobs") {
            cfg.jobs = static_cast<unsigned>(std::stoul(value));
        } else if (key == "out") {
            cfg.out_dir = value;
        } else {
            throw std::runtime_error("unknown config key '" + key + "'");
        }
    }

    if (cfg.stage2 > cfg.stage1 || cfg.stage1 < 1 || cfg.stage2 < 1) {
        throw std::runtime_error("need stage1 >= stage2 >= 1");
    }

    for (const std::string& entry : csv::split_fields(scenarios)) {
        if (entry.empty()) continue;
        const auto colon = entry.find(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("scenario '" + entry + "' is not alpha:beta");
        }
        ScenarioConfig sc;
        sc.params = {std::stod(entry.substr(0, colon)), std::stod(entry.substr(colon + 1))};
        sc.params.validate();
        sc.compartments = framework == Framework::sir
                              ? Compartments{Framework::sir, period_mean}
                              : Compartments{Framework::si, 0.0};
        sc.n = n;
        sc.side = side;
        sc.t_end = t_end;
        sc.grid = grid;
        sc.name = detail::scenario_label(sc.params.alpha, sc.params.beta, framework);
        cfg.scenarios.push_back(std::move(sc));
    }
    if (include_fmd) cfg.scenarios.push_back(detail::fmd_scenario(framework));
    if (cfg.scenarios.empty()) throw std::runtime_error("no scenarios configured");
    return cfg;
}

namespace detail {

struct DatasetOutcome {
    bool simulated = false;
    double chosen_beta0 = 0.0;
    bool tuned = false;
    std::string failure;  // empty on success
    // stage-2 results
    bool fitted = false;
    double ilm_mse_mean_ref = 0.0, ilm_mse_obs_ref = 0.0, ilm_avg_sd = 0.0, ilm_coverage = 0.0;
    double cl_mse_mean_ref = 0.0, cl_mse_obs_ref = 0.0, cl_avg_sd = 0.0, cl_coverage = 0.0;
};

// MSE of the stored replicate curves against either reference, so both
// flavours can be reported from one set of simulations.
inline double ppc_mse_against(const PpcResult& result, PpcReference reference) {
    double sq_sum = 0.0;
    const std::size_t t_len = result.mean.size();
    for (const auto& curve : result.curves) {
        for (std::size_t t = 0; t < t_len; ++t) {
            const double ref = reference == PpcReference::predictive_mean
                                   ? result.mean[t]
                                   : static_cast<double>(result.observed[t]);
            const double diff = static_cast<double>(curve.counts[t]) - ref;
            sq_sum += diff * diff;
        }
    }
    return sq_sum / (static_cast<double>(result.curves.size()) * static_cast<double>(t_len));
}

inline void write_resolved_config(const ExperimentConfig& cfg,
                                  const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "stage1=" << cfg.stage1 << '\n'
        << "stage2=" << cfg.stage2 << '\n'
        << "transform=" << to_string(cfg.transform) << '\n'
        << "mcmc_iterations=" << cfg.mcmc.iterations << '\n'
        << "mcmc_burn_in=" << cfg.mcmc.burn_in << '\n'
        << "mcmc_thin=" << cfg.mcmc.thin << '\n'
        << "ppc_replicates=" << cfg.ppc_replicates << '\n'
        << "reference="
        << (cfg.reference == PpcReference::predictive_mean ? "mean" : "observed") << '\n'
        << "min_infected=" << cfg.min_infected << '\n'
        << "seed=" << cfg.seed << '\n'
        << "jobs=" << cfg.jobs << '\n';
    for (const auto& sc : cfg.scenarios) {
        out << "scenario." << sc.name << "=alpha:" << csv::format_double(sc.params.alpha)
            << ",beta:" << csv::format_double(sc.params.beta)
            << ",framework:" << to_string(sc.compartments.framework)
            << ",period_mean:" << csv::format_double(sc.compartments.infectious_period_mean)
            << ",n:" << sc.n << ",side:" << csv::format_double(sc.side)
            << ",t_end:" << sc.t_end << ",grid:" << sc.grid << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace detail

inline void run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    detail::write_resolved_config(cfg, cfg.out_dir / "resolved_config.txt");

    csv::Writer selection(cfg.out_dir / "stage1_selection.csv");
    selection.row({"scenario", "beta0", "count", "proportion"});
    csv::Writer metrics(cfg.out_dir / "ppc_metrics.csv");
    metrics.row({"scenario", "model", "avg_mse_mean_ref", "avg_mse_obs_ref", "avg_sd"});
    csv::Writer coverage(cfg.out_dir / "coverage.csv");
    coverage.row({"scenario", "model", "mean_coverage", "sd_coverage"});
    csv::Writer failures(cfg.out_dir / "failures.csv");
    failures.row({"scenario", "dataset", "message"});

    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        const ScenarioConfig& sc = cfg.scenarios[s];
        const std::uint64_t scenario_seed = derive_seed(cfg.seed, 1000 + s);
        const Beta0Grid grid = Beta0Grid::parse(sc.grid);
        const fs::path scenario_dir = cfg.out_dir / sc.name;
        fs::create_directories(scenario_dir);

        std::vector<detail::DatasetOutcome> outcomes(
            static_cast<std::size_t>(cfg.stage1));

        parallel_for(static_cast<std::size_t>(cfg.stage1), cfg.jobs, [&](std::size_t d) {
            detail::DatasetOutcome& out = outcomes[d];
            const std::uint64_t ds_seed = derive_seed(scenario_seed, d);
            const fs::path ds_dir = scenario_dir / ("dataset_" + std::to_string(d + 1));
            try {
                fs::create_directories(ds_dir);
                const Population pop =
                    sample_population(sc.n, sc.side, derive_seed(ds_seed, 0));
                const DistanceMatrix dists = distance_matrix(pop);

                // redraw (deterministically) until the epidemic takes off
                std::optional<EpidemicRecord> record;
                for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
                    SimConfig sim;
                    sim.params = sc.params;
                    sim.compartments = sc.compartments;
                    sim.t_end = sc.t_end;
                    sim.seed = derive_seed(ds_seed, 100 + attempt);
                    EpidemicRecord r = simulate(sim, pop, dists);
                    if (r.infected_count() >= cfg.min_infected) {
                        record = std::move(r);
                        break;
                    }
                }
                if (!record) {
                    throw std::runtime_error("no epidemic reached min_infected within 50 draws");
                }
                write_population_csv(pop, ds_dir / "population.csv");
                write_epidemic_csv(*record, ds_dir / "epidemic.csv");
                out.simulated = true;

                const TuneResult tuned = tune_beta0(*record, pop, dists, grid,
                                                    cfg.transform, 1);
                write_tune_csv(tuned, ds_dir / "tune.csv");
                out.chosen_beta0 = tuned.chosen_beta0;
                out.tuned = true;

                if (d < static_cast<std::size_t>(cfg.stage2)) {
                    const BinaryTable table =
                        convert(*record, pop, dists, tuned.chosen_beta0, cfg.transform);
                    write_binary_csv(table, ds_dir / "binary.csv", ds_dir / "binary.meta");

                    McmcSettings ilm_settings = cfg.mcmc;
                    ilm_settings.seed = derive_seed(ds_seed, 200);
                    const PosteriorSample ilm_post =
                        mcmc_ilm(*record, pop, dists, PriorSpec{}, ilm_settings);
                    write_posterior_csv(ilm_post, ds_dir / "posterior_ilm.csv");

                    McmcSettings cl_settings = cfg.mcmc;
                    cl_settings.seed = derive_seed(ds_seed, 201);
                    const PosteriorSample cl_post =
                        mcmc_clilm(table, PriorSpec{}, cl_settings);
                    write_posterior_csv(cl_post, ds_dir / "posterior_clilm.csv");

                    PpcConfig ppc_cfg;
                    ppc_cfg.replicates = cfg.ppc_replicates;
                    ppc_cfg.reference = cfg.reference;
                    ppc_cfg.jobs = 1;

                    PpcModelSpec ilm_model;
                    ilm_model.kind = PpcModel::ilm;
                    ppc_cfg.seed = derive_seed(ds_seed, 300);
                    const PpcResult ilm_ppc = run_ppc(ilm_post, ilm_model, pop, dists,
                                                      sc.compartments, *record, ppc_cfg);
                    write_ppc_bundle(ilm_ppc, ds_dir / "ppc_ilm");

                    PpcModelSpec cl_model;
                    cl_model.kind = PpcModel::clilm;
                    cl_model.beta0 = tuned.chosen_beta0;
                    cl_model.transform = cfg.transform;
                    ppc_cfg.seed = derive_seed(ds_seed, 301);
                    const PpcResult cl_ppc = run_ppc(cl_post, cl_model, pop, dists,
                                                     sc.compartments, *record, ppc_cfg);
                    write_ppc_bundle(cl_ppc, ds_dir / "ppc_clilm");

                    out.ilm_mse_mean_ref =
                        detail::ppc_mse_against(ilm_ppc, PpcReference::predictive_mean);
                    out.ilm_mse_obs_ref =
                        detail::ppc_mse_against(ilm_ppc, PpcReference::observed);
                    out.ilm_avg_sd = ilm_ppc.avg_sd;
                    out.ilm_coverage = ilm_ppc.coverage;
                    out.cl_mse_mean_ref =
                        detail::ppc_mse_against(cl_ppc, PpcReference::predictive_mean);
                    out.cl_mse_obs_ref =
                        detail::ppc_mse_against(cl_ppc, PpcReference::observed);
                    out.cl_avg_sd = cl_ppc.avg_sd;
                    out.cl_coverage = cl_ppc.coverage;
                    out.fitted = true;
                }
            } catch (const std::exception& err) {
                out.failure = err.what();
            }
        });

        // stage-1 selection proportions
        std::map<double, int> selected;
        int tuned_count = 0;
        for (const auto& out : outcomes) {
            if (out.tuned) {
                ++selected[out.chosen_beta0];
                ++tuned_count;
            }
        }
        for (const auto& [beta0, count] : selected) {
            selection.row({sc.name, csv::format_double(beta0), std::to_string(count),
                           csv::format_double(static_cast<double>(count) /
                                              static_cast<double>(tuned_count))});
        }

        // stage-2 aggregates
        struct Agg {
            double mse_mean = 0.0, mse_obs = 0.0, sd = 0.0;
            std::vector<double> coverages;
        };
        Agg ilm_agg, cl_agg;
        int fitted_count = 0;
        for (const auto& out : outcomes) {
            if (!out.fitted) continue;
            ++fitted_count;
            ilm_agg.mse_mean += out.ilm_mse_mean_ref;
            ilm_agg.mse_obs += out.ilm_mse_obs_ref;
            ilm_agg.sd += out.ilm_avg_sd;
            ilm_agg.coverages.push_back(out.ilm_coverage);
            cl_agg.mse_mean += out.cl_mse_mean_ref;
            cl_agg.mse_obs += out.cl_mse_obs_ref;
            cl_agg.sd += out.cl_avg_sd;
            cl_agg.coverages.push_back(out.cl_coverage);
        }
        const auto emit = [&](const std::string& model, const Agg& agg) {
            if (fitted_count == 0) return;
            const double k = static_cast<double>(fitted_count);
            metrics.row({sc.name, model, csv::format_double(agg.mse_mean / k),
                         csv::format_double(agg.mse_obs / k),
                         csv::format_double(agg.sd / k)});
            double mean_cov = 0.0;
            for (const double c : agg.coverages) mean_cov += c;
            mean_cov /= k;
            double var_cov = 0.0;
            for (const double c : agg.coverages) var_cov += (c - mean_cov) * (c - mean_cov);
            const double sd_cov = agg.coverages.size() > 1
                                      ? std::sqrt(var_cov / (k - 1.0))
                                      : 0.0;
            coverage.row({sc.name, model, csv::format_double(mean_cov),
                          csv::format_double(sd_cov)});
        };
        emit("ilm", ilm_agg);
        emit("clilm", cl_agg);

        for (std::size_t d = 0; d < outcomes.size(); ++d) {
            if (!outcomes[d].failure.empty()) {
                failures.row({sc.name, std::to_string(d + 1), outcomes[d].failure});
            }
        }
    }

    selection.close();
    metrics.close();
    coverage.close();
    failures.close();
}

}  // namespace clilm
