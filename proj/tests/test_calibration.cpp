#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <volcal/calibration.hpp>
#include <volcal/heston.hpp>
#include <volcal/msv.hpp>

#include "test_utils.hpp"

using namespace volcal;
using testutil::Gen;

namespace {

Dataset synthetic_dataset(const ModelParams& truth, int n_strikes, int n_taus) {
    Dataset ds;
    ds.label = "synthetic";
    int id = 0;
    for (int t = 0; t < n_taus; ++t) {
        const double tau = n_taus == 1 ? 0.5 : 0.25 + 1.25 * t / (n_taus - 1);
        for (int i = 0; i < n_strikes; ++i) {
            Quote q;
            q.quote_id = "q" + std::to_string(id++);
            q.spot = 100.0;
            q.strike = 70.0 + 60.0 * i / (n_strikes - 1);
            q.tau = tau;
            q.rate = 0.01;
            q.mid_price = model_price(truth, q.spot, q.strike, q.rate, q.tau);
            ds.quotes.push_back(q);
        }
    }
    return ds;
}

} // namespace

TEST_CASE("loss definition and feller penalty", "[calibration]") {
    Dataset ds = synthetic_dataset(ModelParams{BsParams{0.2}}, 10, 2);
    const ModelParams truth{BsParams{0.2}};

    const double self = calibration_loss(truth, ds);
    CHECK(self < 1e-16 * ds.quotes.size() * 100.0 * 100.0);

    SECTION("one unit of price error is one unit of SSE") {
        ds.quotes[7].mid_price += 1.0;
        CHECK(calibration_loss(truth, ds) == Catch::Approx(self + 1.0).margin(1e-9));
    }

    SECTION("rmse is the monotone transform of sse") {
        ds.quotes[3].mid_price += 0.5;
        const double sse = calibration_loss(truth, ds, LossKind::sse);
        const double rmse = calibration_loss(truth, ds, LossKind::rmse);
        CHECK(rmse == Catch::Approx(std::sqrt(sse / ds.quotes.size())).epsilon(1e-14));
    }

    SECTION("feller penalty adds weight times squared excess") {
        const HestonParams viol{0.04, 0.5, 0.04, 0.9, -0.5}; // 2*k*th = 0.04 < 0.81
        Dataset hds = synthetic_dataset(ModelParams{viol}, 5, 1);
        const double excess = 0.9 * 0.9 - 2.0 * 0.5 * 0.04;
        const double base = calibration_loss(ModelParams{viol}, hds, LossKind::sse, 0.0);
        const double pen = calibration_loss(ModelParams{viol}, hds, LossKind::sse, 10.0);
        CHECK(pen - base == Catch::Approx(10.0 * excess * excess).epsilon(1e-12));

        const HestonParams ok{0.04, 1.5, 0.04, 0.2, -0.5}; // feller holds, no penalty
        Dataset ods = synthetic_dataset(ModelParams{ok}, 5, 1);
        CHECK(calibration_loss(ModelParams{ok}, ods, LossKind::sse, 10.0) ==
              calibration_loss(ModelParams{ok}, ods, LossKind::sse, 0.0));
    }

    SECTION("empty dataset and pricing failures are reported") {
        Dataset empty;
        empty.label = "empty";
        CHECK_THROWS_AS(calibration_loss(truth, empty), InvalidInput);

        Dataset one;
        one.label = "x";
        Quote q;
        q.quote_id = "bad1";
        q.spot = 100.0;
        q.strike = 100.0;
        q.tau = 0.5;
        q.rate = 0.01;
        q.mid_price = 5.0;
        one.quotes.push_back(q);
        const ModelParams patho{HestonParams{0.04, 1.5, 0.04, 1e300, -0.5}};
        CHECK_THROWS_WITH(calibration_loss(patho, one),
                          Catch::Matchers::ContainsSubstring("bad1"));
    }

    SECTION("flat fit beats nothing on a smile it cannot bend to") {
        const HestonParams smile{0.04, 1.0, 0.09, 0.9, -0.8};
        Dataset sds = synthetic_dataset(ModelParams{smile}, 13, 1);
        CalibrationConfig cfg;
        cfg.model = Model::bs;
        cfg.max_evals = 300;
        cfg.n_starts = 1;
        const auto bs_fit = calibrate(sds, cfg);
        CHECK(bs_fit.loss > calibration_loss(ModelParams{smile}, sds));
    }
}

TEST_CASE("parameter transforms are a bijection", "[calibration]") {
    SECTION("pinned coordinates") {
        CHECK(transform_to_unbounded(ModelParams{BsParams{1.0}})[0] == 0.0);
        const HestonParams h{0.04, 1.5, 0.04, 0.5, 0.0};
        CHECK(transform_to_unbounded(ModelParams{h})[4] == 0.0);
    }

    SECTION("round-trip over 1000 random parameter vectors") {
        Gen gen(240816u);
        double worst = 0.0;
        for (int it = 0; it < 1000; ++it) {
            ModelParams p;
            std::vector<double> fields;
            switch (gen.index(3)) {
                case 0: {
                    const BsParams b{gen.uniform(0.01, 2.0)};
                    p = b;
                    fields = {b.sigma};
                    break;
                }
                case 1: {
                    HestonParams h;
                    h.v0 = gen.uniform(1e-3, 1.0);
                    h.kappa = gen.uniform(0.01, 10.0);
                    h.theta = gen.uniform(1e-3, 1.0);
                    h.vol_of_vol = gen.uniform(0.05, 3.0);
                    h.rho = gen.uniform(-0.99, 0.99);
                    p = h;
                    fields = {h.v0, h.kappa, h.theta, h.vol_of_vol, h.rho};
                    break;
                }
                default: {
                    MsvParams m;
                    m.sigma0_hat = gen.uniform(1e-3, 1.0);
                    m.sigma1_hat = gen.uniform(1e-3, 1.0);
                    m.sigma2_hat = gen.uniform(1e-3, 1.0);
                    m.lambda = gen.uniform(1e-3, 10.0);
                    m.k = gen.uniform(1e-3, 1.0);
                    p = m;
                    fields = {m.sigma0_hat, m.sigma1_hat, m.sigma2_hat, m.lambda, m.k};
                    break;
                }
            }
            const ModelParams back = untransform(transform_to_unbounded(p), model_of(p));
            std::vector<double> back_fields;
            if (const auto* b = std::get_if<BsParams>(&back)) {
                back_fields = {b->sigma};
            } else if (const auto* h = std::get_if<HestonParams>(&back)) {
                back_fields = {h->v0, h->kappa, h->theta, h->vol_of_vol, h->rho};
            } else {
                const auto& m = std::get<MsvParams>(back);
                back_fields = {m.sigma0_hat, m.sigma1_hat, m.sigma2_hat, m.lambda, m.k};
            }
            REQUIRE(back_fields.size() == fields.size());
            for (std::size_t i = 0; i < fields.size(); ++i) {
                worst = std::max(worst, testutil::rel_diff(fields[i], back_fields[i]));
            }
        }
        CHECK(worst <= 1e-12);
    }

    SECTION("boundary parameters are rejected") {
        CHECK_THROWS_AS(transform_to_unbounded(ModelParams{BsParams{0.0}}), InvalidInput);
        CHECK_THROWS_AS(transform_to_unbounded(ModelParams{HestonParams{0.04, 1.5, 0.04, 0.5, 1.0}}),
                        InvalidInput);
        CHECK_THROWS_AS(transform_to_unbounded(ModelParams{MsvParams{0.0, 0.1, 0.1, 1.0, 0.1}}),
                        InvalidInput);
        CHECK_THROWS_AS(untransform({0.0, 0.0}, Model::heston), InvalidInput);
        CHECK_THROWS_AS(untransform({0.0, 0.0, 0.0, 0.0, 0.0}, Model::bs), InvalidInput);
    }
}

TEST_CASE("nelder-mead solves the standard test functions", "[calibration]") {
    SECTION("convex quadratic from the origin") {
        auto quad = [](const std::vector<double>& x) {
            double s = 0.0;
            for (double xi : x) s += (xi - 3.0) * (xi - 3.0);
            return s;
        };
        const auto res = nelder_mead(quad, std::vector<double>(4, 0.0), 2000, 1e-16);
        for (double xi : res.x) CHECK(std::fabs(xi - 3.0) < 1e-6);
    }

    SECTION("rosenbrock valley") {
        auto rosen = [](const std::vector<double>& x) {
            const double a = 1.0 - x[0];
            const double b = x[1] - x[0] * x[0];
            return a * a + 100.0 * b * b;
        };
        const auto res = nelder_mead(rosen, {-1.2, 1.0}, 2000, 1e-12);
        CHECK(res.f < 1e-8);
        CHECK(res.n_evals <= 2000);
    }

    SECTION("result reports the best point actually seen") {
        std::vector<double> seen;
        auto noisy = [&](const std::vector<double>& x) {
            const double f = (x[0] - 1.0) * (x[0] - 1.0) + std::sin(5.0 * x[0]);
            seen.push_back(f);
            return f;
        };
        const auto res = nelder_mead(noisy, {4.0}, 200, 1e-14);
        REQUIRE(!seen.empty());
        CHECK(static_cast<long long>(seen.size()) == res.n_evals);
        double best = seen[0];
        for (double f : seen) best = std::min(best, f);
        CHECK(res.f == best);
    }

    SECTION("identical inputs give identical traces") {
        auto rosen = [](const std::vector<double>& x) {
            const double a = 1.0 - x[0];
            const double b = x[1] - x[0] * x[0];
            return a * a + 100.0 * b * b;
        };
        const auto a = nelder_mead(rosen, {-1.2, 1.0}, 500, 1e-12);
        const auto b = nelder_mead(rosen, {-1.2, 1.0}, 500, 1e-12);
        CHECK(a.f == b.f);
        CHECK(a.x == b.x);
        CHECK(a.n_evals == b.n_evals);
    }
}

TEST_CASE("start points are seeded, centered, and bounded", "[calibration]") {
    CalibrationConfig cfg;
    cfg.model = Model::heston;
    cfg.n_starts = 4;
    cfg.seed = 99;
    const auto starts = calib_detail::start_points(cfg);
    REQUIRE(starts.size() == 4);

    const auto center = transform_to_unbounded(calib_detail::default_start(Model::heston));
    CHECK(starts[0] == center);
    for (std::size_t s = 1; s < starts.size(); ++s) {
        REQUIRE(starts[s].size() == center.size());
        for (std::size_t j = 0; j < center.size(); ++j) {
            const double width = (j == 4) ? 0.2 : 0.5;
            CHECK(std::fabs(starts[s][j] - center[j]) <= width);
        }
    }

    const auto same = calib_detail::start_points(cfg);
    CHECK(same == starts);
    cfg.seed = 100;
    const auto other = calib_detail::start_points(cfg);
    CHECK(other[1] != starts[1]);
}

TEST_CASE("self-fits reach the noise floor", "[calibration]") {
    SECTION("black-scholes recovers sigma") {
        Dataset ds = synthetic_dataset(ModelParams{BsParams{0.2}}, 10, 2);
        CalibrationConfig cfg;
        cfg.model = Model::bs;
        cfg.max_evals = 500;
        cfg.n_starts = 2;
        cfg.seed = 7;
        const auto res = calibrate(ds, cfg);
        CHECK(res.loss <= 1e-10 * ds.quotes.size() * 100.0 * 100.0);
        CHECK(std::fabs(std::get<BsParams>(res.params).sigma - 0.2) < 1e-4);
        CHECK(res.elapsed_seconds > 0.0);
        CHECK(res.n_evals > 0);
    }

    SECTION("msv reaches its tight floor") {
        const MsvParams truth{0.18, 0.12, 0.19, 1.2, 0.12};
        Dataset ds = synthetic_dataset(ModelParams{truth}, 10, 2);
        CalibrationConfig cfg;
        cfg.model = Model::msv;
        cfg.max_evals = 4000;
        cfg.n_starts = 2;
        cfg.seed = 11;
        const auto res = calibrate(ds, cfg);
        CHECK(res.loss <= 1e-10 * ds.quotes.size() * 100.0 * 100.0);
        std::visit([](const auto& p) { p.validate(); }, res.params);
    }

    SECTION("heston reaches the quadrature noise floor") {
        const HestonParams truth{0.05, 2.0, 0.05, 0.4, -0.6};
        Dataset ds = synthetic_dataset(ModelParams{truth}, 10, 2);
        CalibrationConfig cfg;
        cfg.model = Model::heston;
        cfg.max_evals = 2000;
        cfg.n_starts = 2;
        cfg.seed = 3;
        const auto res = calibrate(ds, cfg);
        CHECK(res.loss <= 1e-6 * ds.quotes.size() * 100.0 * 100.0);
        std::visit([](const auto& p) { p.validate(); }, res.params);
    }
}

TEST_CASE("calibration is deterministic", "[calibration]") {
    const MsvParams truth{0.18, 0.12, 0.19, 1.2, 0.12};
    Dataset ds = synthetic_dataset(ModelParams{truth}, 8, 1);
    CalibrationConfig cfg;
    cfg.model = Model::msv;
    cfg.max_evals = 600;
    cfg.n_starts = 3;
    cfg.seed = 21;

    const auto a = calibrate(ds, cfg);
    const auto b = calibrate(ds, cfg);
    CHECK(a.loss == b.loss);
    CHECK(a.n_evals == b.n_evals);
    CHECK(a.start_index == b.start_index);
    CHECK(a.converged == b.converged);
    CHECK(transform_to_unbounded(a.params) == transform_to_unbounded(b.params));
    CHECK(a.elapsed_seconds > 0.0);
    CHECK(b.elapsed_seconds > 0.0);
}

TEST_CASE("hopeless objectives raise calibration failure", "[calibration]") {
    // A quote no parameter vector can price: every start fails, and the
    // failure is reported as such rather than returning garbage parameters.
    Dataset ds;
    ds.label = "hopeless";
    Quote q;
    q.quote_id = "bad";
    q.spot = -5.0;
    q.strike = 100.0;
    q.tau = 0.5;
    q.rate = 0.01;
    q.mid_price = 1.0;
    ds.quotes.push_back(q);

    CalibrationConfig cfg;
    cfg.model = Model::bs;
    cfg.max_evals = 120;
    cfg.n_starts = 2;
    CHECK_THROWS_AS(calibrate(ds, cfg), CalibrationFailure);
}

TEST_CASE("calibration config validation", "[calibration]") {
    Dataset ds = synthetic_dataset(ModelParams{BsParams{0.2}}, 4, 1);
    CalibrationConfig cfg;

    cfg.max_evals = 99;
    CHECK_THROWS_AS(calibrate(ds, cfg), InvalidInput);
    cfg.max_evals = 2000;
    cfg.n_starts = 0;
    CHECK_THROWS_AS(calibrate(ds, cfg), InvalidInput);
    cfg.n_starts = 1;
    cfg.tolerance = 0.0;
    CHECK_THROWS_AS(calibrate(ds, cfg), InvalidInput);
    cfg.tolerance = 1e-10;
    cfg.feller_penalty_weight = -1.0;
    CHECK_THROWS_AS(calibrate(ds, cfg), InvalidInput);
    cfg.feller_penalty_weight = 0.0;
    cfg.msv_order = 5;
    CHECK_THROWS_AS(calibrate(ds, cfg), InvalidInput);
    cfg.msv_order = 4;

    Dataset empty;
    empty.label = "none";
    CHECK_THROWS_AS(calibrate(empty, cfg), InvalidInput);
}
