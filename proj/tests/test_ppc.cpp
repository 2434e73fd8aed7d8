#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "clilm/ppc.hpp"
#include "clilm/simulate.hpp"
#include "oracles.hpp"

using namespace clilm;

TEST_CASE("epidemic curve of the toy record", "[ppc]") {
    const EpidemicCurve curve = epidemic_curve(oracles::toy_record());
    REQUIRE(curve.counts == std::vector<int>{0, 1, 1, 1, 1});
}

TEST_CASE("curve of a lone initial case", "[ppc]") {
    EpidemicRecord rec({{"a", 1, std::nullopt}, {"b", std::nullopt, std::nullopt}}, 5);
    const EpidemicCurve curve = epidemic_curve(rec);
    REQUIRE(curve.counts == std::vector<int>{1, 0, 0, 0, 0});
}

TEST_CASE("curve counts sum to the number ever infected", "[ppc]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Population pop = sample_population(50, 10.0, derive_seed(200, seed));
        SimConfig cfg;
        cfg.params = {0.6, 3.0};
        cfg.compartments = seed % 2 == 0 ? Compartments{Framework::si, 0.0}
                                         : Compartments{Framework::sir, 3.0};
        cfg.t_end = 12;
        cfg.initial_infectious = {0};
        cfg.seed = derive_seed(201, seed);
        const EpidemicRecord rec = simulate(cfg, pop);
        const EpidemicCurve curve = epidemic_curve(rec);
        const int total = std::accumulate(curve.counts.begin(), curve.counts.end(), 0);
        REQUIRE(static_cast<std::size_t>(total) == rec.infected_count());
    }
}

TEST_CASE("clilm simulation with a hopeless intercept stays quiet", "[ppc]") {
    const Population pop = sample_population(40, 10.0, 77);
    const auto dists = distance_matrix(pop);
    const EpidemicRecord rec = simulate_from_clilm({-30.0, 0.0, 2.0, Transform::identity},
                                                   pop, dists, {Framework::si, 0.0}, 20,
                                                   {0}, 5);
    REQUIRE(rec.infected_count() == 1);
}

TEST_CASE("clilm simulation matches its infection probability empirically", "[ppc]") {
    Population pop({{"1", 0.0, 0.0}, {"2", 1.5, 0.0}});
    const auto dists = distance_matrix(pop);
    const ClilmParams params{-1.0, 1.0, 2.0, Transform::identity};
    const std::vector<std::size_t> inf{0};
    const double p =
        clilm_infection_prob(params, spatial_covariate(2.0, 1, inf, dists,
                                                       Transform::identity));
    int hits = 0;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        const EpidemicRecord rec =
            simulate_from_clilm(params, pop, dists, {Framework::si, 0.0}, 2, {0},
                                derive_seed(300, static_cast<std::uint64_t>(r)));
        if (rec[1].t_inf) ++hits;
    }
    const double freq = static_cast<double>(hits) / reps;
    const double se = std::sqrt(p * (1.0 - p) / reps);
    REQUIRE(std::abs(freq - p) < 3.0 * se);
}

TEST_CASE("clilm simulation is deterministic per seed", "[ppc]") {
    const Population pop = sample_population(60, 10.0, 31);
    const auto dists = distance_matrix(pop);
    const ClilmParams params{-2.0, 1.2, 4.0, Transform::log};
    const EpidemicRecord a =
        simulate_from_clilm(params, pop, dists, {Framework::sir, 3.0}, 15, {4}, 11);
    const EpidemicRecord b =
        simulate_from_clilm(params, pop, dists, {Framework::sir, 3.0}, 15, {4}, 11);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].t_inf == b[i].t_inf);
        REQUIRE(a[i].t_rem == b[i].t_rem);
    }
}

TEST_CASE("type-7 quantiles bracket the documented order statistics", "[ppc]") {
    std::vector<double> v(500);
    for (int k = 0; k < 500; ++k) v[static_cast<std::size_t>(k)] = k + 1.0;
    const double lo = detail::quantile_type7(v, 0.025);
    const double hi = detail::quantile_type7(v, 0.975);
    // S=500: lower falls between the 13th and 14th order statistics,
    // upper between the 487th and 488th
    REQUIRE(lo >= 13.0);
    REQUIRE(lo <= 14.0);
    REQUIRE_THAT(lo, Catch::Matchers::WithinAbs(13.475, 1e-12));
    REQUIRE(hi >= 487.0);
    REQUIRE(hi <= 488.0);
    REQUIRE_THAT(hi, Catch::Matchers::WithinAbs(487.525, 1e-12));
    // monotone in the requested level
    REQUIRE(detail::quantile_type7(v, 0.95) <= detail::quantile_type7(v, 0.975));
}

namespace {

PosteriorSample constant_sample(double p0, double p1, std::size_t n = 50) {
    PosteriorSample sample;
    for (std::size_t k = 0; k < n; ++k) {
        sample.draws.push_back({p0, p1});
        sample.log_posts.push_back(0.0);
    }
    return sample;
}

}  // namespace

TEST_CASE("degenerate agreement gives zero mse and full coverage", "[ppc]") {
    const Population pop = sample_population(30, 10.0, 41);
    // observed: a lone initial case, nothing else ever happens
    EpidemicRecord observed = [&] {
        SimConfig cfg;
        cfg.params = {0.0, 4.0};
        cfg.t_end = 10;
        cfg.initial_infectious = {2};
        cfg.seed = 1;
        return simulate(cfg, pop);
    }();

    // CL-ILM with an impossible intercept reproduces that exactly
    PpcModelSpec model;
    model.kind = PpcModel::clilm;
    model.beta0 = 2.0;
    model.transform = Transform::identity;
    PpcConfig config;
    config.replicates = 40;
    config.seed = 9;
    const PpcResult result = run_ppc(constant_sample(-40.0, 0.0), model, pop,
                                     distance_matrix(pop), {Framework::si, 0.0}, observed,
                                     config);
    REQUIRE(result.mse == 0.0);
    REQUIRE(result.coverage == 1.0);
    for (std::size_t t = 0; t < result.mean.size(); ++t) {
        REQUIRE(result.lower[t] <= result.mean[t]);
        REQUIRE(result.mean[t] <= result.upper[t]);
    }

    PpcConfig obs_ref = config;
    obs_ref.reference = PpcReference::observed;
    const PpcResult result2 = run_ppc(constant_sample(-40.0, 0.0), model, pop,
                                      distance_matrix(pop), {Framework::si, 0.0}, observed,
                                      obs_ref);
    REQUIRE(result2.mse == 0.0);
}

TEST_CASE("the min-max band covers at least as often as the 95% band", "[ppc]") {
    const Population pop = sample_population(80, 10.0, 4);
    const auto dists = distance_matrix(pop);
    SimConfig cfg;
    cfg.params = {0.7, 4.0};
    cfg.t_end = 12;
    cfg.initial_infectious = {0};
    cfg.seed = 15;
    const EpidemicRecord observed = simulate(cfg, pop, dists);

    // parameter uncertainty around the generating values
    PosteriorSample sample;
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        sample.draws.push_back({0.7 + 0.2 * rng.normal(), 4.0 + 0.3 * rng.normal()});
        sample.log_posts.push_back(0.0);
    }
    PpcModelSpec model;
    model.kind = PpcModel::ilm;
    PpcConfig config;
    config.replicates = 100;
    config.seed = 33;
    const PpcResult result =
        run_ppc(sample, model, pop, dists, {Framework::si, 0.0}, observed, config);

    std::size_t covered_minmax = 0;
    for (std::size_t t = 0; t < result.mean.size(); ++t) {
        int lo = result.curves[0].counts[t], hi = lo;
        for (const auto& c : result.curves) {
            lo = std::min(lo, c.counts[t]);
            hi = std::max(hi, c.counts[t]);
        }
        if (lo <= result.observed[t] && result.observed[t] <= hi) ++covered_minmax;
    }
    const double minmax_coverage =
        static_cast<double>(covered_minmax) / static_cast<double>(result.mean.size());
    REQUIRE(minmax_coverage >= result.coverage);
    REQUIRE(result.mse > 0.0);
}

TEST_CASE("ppc validation", "[ppc]") {
    const Population pop = sample_population(20, 10.0, 8);
    SimConfig cfg;
    cfg.params = {0.5, 3.0};
    cfg.t_end = 8;
    cfg.initial_infectious = {0};
    cfg.seed = 3;
    const EpidemicRecord observed = simulate(cfg, pop);
    PpcModelSpec model;
    model.kind = PpcModel::ilm;
    PpcConfig config;
    config.replicates = 1;
    REQUIRE_THROWS_AS(run_ppc(constant_sample(0.5, 3.0), model, pop, distance_matrix(pop),
                              {Framework::si, 0.0}, observed, config),
                      std::invalid_argument);
    config.replicates = 10;
    REQUIRE_THROWS_AS(run_ppc(PosteriorSample{}, model, pop, distance_matrix(pop),
                              {Framework::si, 0.0}, observed, config),
                      std::invalid_argument);
}

TEST_CASE("ppc bundle files are written and readable", "[ppc]") {
    namespace fs = std::filesystem;
    const Population pop = sample_population(30, 10.0, 5);
    const auto dists = distance_matrix(pop);
    SimConfig cfg;
    cfg.params = {0.7, 4.0};
    cfg.t_end = 10;
    cfg.initial_infectious = {0};
    cfg.seed = 21;
    const EpidemicRecord observed = simulate(cfg, pop, dists);
    PpcModelSpec model;
    model.kind = PpcModel::ilm;
    PpcConfig config;
    config.replicates = 20;
    config.seed = 5;
    const PpcResult result = run_ppc(constant_sample(0.7, 4.0), model, pop, dists,
                                     {Framework::si, 0.0}, observed, config);
    const fs::path dir = fs::temp_directory_path() / "clilm_test_ppc";
    write_ppc_bundle(result, dir);
    const auto curves = csv::read_file(dir / "curves.csv", {"replicate", "t", "count"});
    REQUIRE(curves.records.size() == 20 * 10);
    const auto summary = csv::read_file(dir / "summary.csv", {"t", "mean", "lo", "hi", "observed"});
    REQUIRE(summary.records.size() == 10);
    const auto metrics = csv::read_file(dir / "metrics.csv", {"mse", "avg_sd", "coverage"});
    REQUIRE(metrics.records.size() == 1);
    fs::remove_all(dir);
}
