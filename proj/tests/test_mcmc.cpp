#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clilm/mcmc.hpp"
#include "clilm/simulate.hpp"
#include "oracles.hpp"

using namespace clilm;

namespace {

// Monte Carlo standard error of the mean of a correlated chain, via batch
// means with 100 batches.
double batch_mcse(const std::vector<std::array<double, 2>>& draws, int dim) {
    const std::size_t batches = 100;
    const std::size_t len = draws.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        double m = 0.0;
        for (std::size_t k = b * len; k < (b + 1) * len; ++k) m += draws[k][dim];
        means.push_back(m / static_cast<double>(len));
    }
    double grand = 0.0;
    for (const double m : means) grand += m;
    grand /= static_cast<double>(batches);
    double var = 0.0;
    for (const double m : means) var += (m - grand) * (m - grand);
    var /= static_cast<double>(batches - 1);
    return std::sqrt(var / static_cast<double>(batches));
}

double log_std_normal2(const Vec2& x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); }

}  // namespace

TEST_CASE("sampler recovers a standard bivariate normal", "[mcmc]") {
    McmcSettings settings;
    settings.iterations = 120000;
    settings.burn_in = 20000;
    settings.thin = 1;
    settings.seed = 99;
    const PosteriorSample sample =
        adaptive_metropolis(log_std_normal2, {3.0, -2.0}, settings);
    REQUIRE(sample.draws.size() == 100000);

    for (int dim = 0; dim < 2; ++dim) {
        double mean = 0.0;
        for (const auto& d : sample.draws) mean += d[dim];
        mean /= static_cast<double>(sample.draws.size());
        const double mcse = batch_mcse(sample.draws, dim);
        INFO("dim " << dim << " mean " << mean << " mcse " << mcse);
        REQUIRE(std::abs(mean) < 3.0 * mcse);
    }

    double c00 = 0.0, c01 = 0.0, c11 = 0.0, m0 = 0.0, m1 = 0.0;
    for (const auto& d : sample.draws) {
        m0 += d[0];
        m1 += d[1];
    }
    m0 /= static_cast<double>(sample.draws.size());
    m1 /= static_cast<double>(sample.draws.size());
    for (const auto& d : sample.draws) {
        c00 += (d[0] - m0) * (d[0] - m0);
        c01 += (d[0] - m0) * (d[1] - m1);
        c11 += (d[1] - m1) * (d[1] - m1);
    }
    const double n = static_cast<double>(sample.draws.size() - 1);
    REQUIRE(std::abs(c00 / n - 1.0) < 0.1);
    REQUIRE(std::abs(c11 / n - 1.0) < 0.1);
    REQUIRE(std::abs(c01 / n) < 0.1);

    REQUIRE(sample.acceptance_rate > 0.05);
    REQUIRE(sample.acceptance_rate < 0.6);
}

TEST_CASE("identical seeds give identical chains", "[mcmc]") {
    McmcSettings settings;
    settings.iterations = 5000;
    settings.burn_in = 1000;
    settings.thin = 2;
    settings.seed = 7;
    const PosteriorSample a = adaptive_metropolis(log_std_normal2, {0.5, 0.5}, settings);
    const PosteriorSample b = adaptive_metropolis(log_std_normal2, {0.5, 0.5}, settings);
    REQUIRE(a.draws == b.draws);
    REQUIRE(a.log_posts == b.log_posts);
    REQUIRE(a.acceptance_rate == b.acceptance_rate);

    settings.seed = 8;
    const PosteriorSample c = adaptive_metropolis(log_std_normal2, {0.5, 0.5}, settings);
    REQUIRE(a.draws != c.draws);
}

TEST_CASE("degenerate requests are rejected", "[mcmc]") {
    McmcSettings settings;
    settings.iterations = 1000;
    settings.burn_in = 1000;  // nothing left after burn-in
    REQUIRE_THROWS_AS(adaptive_metropolis(log_std_normal2, {0.0, 0.0}, settings),
                      std::invalid_argument);
    settings.burn_in = 500;
    settings.thin = 0;
    REQUIRE_THROWS_AS(adaptive_metropolis(log_std_normal2, {0.0, 0.0}, settings),
                      std::invalid_argument);
}

TEST_CASE("initial state outside the prior support is an error", "[mcmc]") {
    const Population pop = sample_population(20, 10.0, 12);
    SimConfig cfg;
    cfg.params = {0.7, 4.0};
    cfg.t_end = 8;
    cfg.initial_infectious = {0};
    cfg.seed = 5;
    const EpidemicRecord rec = simulate(cfg, pop);
    McmcSettings settings;
    settings.iterations = 100;
    settings.burn_in = 10;
    settings.thin = 1;
    REQUIRE_THROWS_AS(mcmc_ilm(rec, pop, PriorSpec{}, settings, Vec2{6.0, 5.0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(mcmc_ilm(rec, pop, PriorSpec{}, settings, Vec2{-0.5, 5.0}),
                      std::invalid_argument);
}

TEST_CASE("ilm posterior draws respect the prior support", "[mcmc]") {
    const Population pop = sample_population(40, 10.0, 3);
    SimConfig cfg;
    cfg.params = {0.7, 4.0};
    cfg.t_end = 10;
    cfg.initial_infectious = {0};
    cfg.seed = 31;
    const EpidemicRecord rec = simulate(cfg, pop);
    McmcSettings settings;
    settings.iterations = 4000;
    settings.burn_in = 500;
    settings.thin = 2;
    settings.seed = 17;
    const PriorSpec priors;
    const PosteriorSample sample = mcmc_ilm(rec, pop, priors, settings);
    REQUIRE_FALSE(sample.draws.empty());
    for (const auto& d : sample.draws) {
        REQUIRE(d[0] > 0.0);
        REQUIRE(d[0] < priors.alpha_max);
        REQUIRE(d[1] > 0.0);
        REQUIRE(d[1] < priors.beta_max);
    }
}

TEST_CASE("stored log posteriors are recomputable", "[mcmc]") {
    const Population pop = sample_population(60, 10.0, 9);
    SimConfig cfg;
    cfg.params = {0.7, 4.0};
    cfg.t_end = 10;
    cfg.initial_infectious = {3};
    cfg.seed = 41;
    const EpidemicRecord rec = simulate(cfg, pop);
    McmcSettings settings;
    settings.iterations = 2000;
    settings.burn_in = 400;
    settings.thin = 4;
    settings.seed = 13;
    const PriorSpec priors;
    const PosteriorSample sample = mcmc_ilm(rec, pop, priors, settings);
    const double log_prior = -std::log(priors.alpha_max * priors.beta_max);
    for (std::size_t k = 0; k < sample.draws.size(); ++k) {
        const double recomputed =
            ilm_log_likelihood(rec, pop, {sample.draws[k][0], sample.draws[k][1]}).value +
            log_prior;
        REQUIRE_THAT(sample.log_posts[k],
                     Catch::Matchers::WithinRel(recomputed, 1e-10));
    }
}

TEST_CASE("clilm posterior agrees with the mle under weak priors", "[mcmc]") {
    const Population pop = sample_population(150, 10.0, 21);
    SimConfig cfg;
    cfg.params = {0.7, 4.0};
    cfg.t_end = 15;
    cfg.initial_infectious = {0};
    cfg.seed = 77;
    const EpidemicRecord rec = simulate(cfg, pop);
    const BinaryTable table = convert(rec, pop, 4.0, Transform::log);
    const IrlsFit mle = irls_fit(table);

    McmcSettings settings;
    settings.iterations = 12000;
    settings.burn_in = 2000;
    settings.thin = 5;
    settings.seed = 23;
    const PosteriorSample sample = mcmc_clilm(table, PriorSpec{}, settings);

    for (int dim = 0; dim < 2; ++dim) {
        double mean = 0.0, var = 0.0;
        for (const auto& d : sample.draws) mean += d[dim];
        mean /= static_cast<double>(sample.draws.size());
        for (const auto& d : sample.draws) var += (d[dim] - mean) * (d[dim] - mean);
        var /= static_cast<double>(sample.draws.size() - 1);
        const double target = dim == 0 ? mle.alpha0 : mle.alpha1;
        INFO("dim " << dim << " mean " << mean << " sd " << std::sqrt(var));
        REQUIRE(std::abs(mean - target) < 3.0 * std::sqrt(var));
    }
    REQUIRE(sample.acceptance_rate > 0.05);
    REQUIRE(sample.acceptance_rate < 0.6);
}

TEST_CASE("posterior csv round-trips", "[mcmc]") {
    namespace fs = std::filesystem;
    McmcSettings settings;
    settings.iterations = 600;
    settings.burn_in = 100;
    settings.thin = 5;
    settings.seed = 3;
    const PosteriorSample sample =
        adaptive_metropolis(log_std_normal2, {0.0, 0.0}, settings);
    const fs::path dir = fs::temp_directory_path() / "clilm_test_mcmc";
    fs::create_directories(dir);
    write_posterior_csv(sample, dir / "post.csv");
    const PosteriorSample back = read_posterior_csv(dir / "post.csv");
    REQUIRE(back.draws == sample.draws);
    REQUIRE(back.log_posts == sample.log_posts);
    REQUIRE(back.acceptance_rate == sample.acceptance_rate);
    fs::remove_all(dir);
}
