#include <complex>
#include <random>

#include "doctest.h"
#include "mgbeam/metrics.hpp"
#include "mgbeam/random.hpp"

using namespace mgbeam;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

Scenario two_user_orthogonal() {
    Scenario sc;
    sc.n_t = 2;
    sc.n_u = 2;
    sc.n_groups = 2;
    sc.groups = {{0}, {1}};
    sc.pac = Eigen::Vector2d(1.0, 1.0);
    UserChannel u1, u2;
    u1.h = VectorXcd(2);
    u1.h << 1.0, 0.0;
    u1.group_id = 1;
    u2.h = VectorXcd(2);
    u2.h << 0.0, 1.0;
    u2.group_id = 2;
    sc.users = {u1, u2};
    return sc;
}

}  // namespace

TEST_CASE("sinr with orthogonal channels and matched precoders") {
    const Scenario sc = two_user_orthogonal();
    PrecoderSet ps;
    ps.w.resize(2);
    ps.w[0] = VectorXcd(2);
    ps.w[0] << 1.0, 0.0;
    ps.w[1] = VectorXcd(2);
    ps.w[1] << 0.0, 1.0;
    const VectorXd s = sinr(ps, sc);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(1.0));
}

TEST_CASE("single group SINR has noise-only denominator") {
    Scenario sc;
    sc.n_t = 2;
    sc.n_u = 2;
    sc.n_groups = 1;
    sc.groups = {{0, 1}};
    sc.pac = Eigen::Vector2d(1.0, 1.0);
    UserChannel u1, u2;
    u1.h = ula_steering(0.2, 2);
    u1.sigma2 = 0.5;
    u2.h = ula_steering(-0.1, 2);
    u2.sigma2 = 2.0;
    u1.group_id = u2.group_id = 1;
    sc.users = {u1, u2};

    PrecoderSet ps;
    ps.w = {VectorXcd(2)};
    ps.w[0] << cxd(0.3, 0.1), cxd(-0.2, 0.4);
    const VectorXd s = sinr(ps, sc);
    CHECK(s[0] == doctest::Approx(std::norm(ps.w[0].dot(u1.h)) / 0.5).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(std::norm(ps.w[0].dot(u2.h)) / 2.0).epsilon(1e-12));
}

TEST_CASE("sinr matches a straight-line duplicate evaluation") {
    Rng rng(7);
    ScenarioConfig cfg;
    cfg.n_t = 4;
    cfg.angles_deg = {15.0, 47.0, -22.0, -60.0};
    cfg.groups = {1, 1, 2, 2};
    cfg.noise_w = {0.7, 1.1, 0.9, 1.4};
    const Scenario sc = build_scenario(cfg);

    PrecoderSet ps;
    ps.w = {rng.cnormal_vector(4), rng.cnormal_vector(4)};
    const VectorXd got = sinr(ps, sc);

    for (int i = 0; i < sc.n_u; ++i) {
        const auto& u = sc.users[i];
        const int k = u.group_id - 1;
        // numerator |w_k^H h_i|^2, denominator sum over other groups + noise
        cxd acc = 0.0;
        for (int n = 0; n < 4; ++n) acc += std::conj(ps.w[k][n]) * u.h[n];
        double denom = u.sigma2;
        for (int l = 0; l < 2; ++l) {
            if (l == k) continue;
            cxd cross = 0.0;
            for (int n = 0; n < 4; ++n) cross += std::conj(ps.w[l][n]) * u.h[n];
            denom += std::norm(cross);
        }
        CHECK(got[i] == doctest::Approx(std::norm(acc) / denom).epsilon(1e-12));
    }
}

TEST_CASE("sinr is invariant to a common phase rotation of one precoder") {
    Rng rng(9);
    ScenarioConfig cfg;
    cfg.n_t = 3;
    cfg.angles_deg = {10.0, -35.0};
    cfg.groups = {1, 2};
    const Scenario sc = build_scenario(cfg);
    PrecoderSet ps;
    ps.w = {rng.cnormal_vector(3), rng.cnormal_vector(3)};
    const VectorXd before = sinr(ps, sc);
    ps.w[1] *= std::polar(1.0, 1.234);
    const VectorXd after = sinr(ps, sc);
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("per_antenna_power basics") {
    PrecoderSet ps;
    ps.w = {VectorXcd(2)};
    ps.w[0] << cxd(1.0, 0.0) / std::sqrt(2.0), cxd(0.0, 1.0) / std::sqrt(2.0);
    VectorXd p = per_antenna_power(ps);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

    PrecoderSet two;
    two.w = {VectorXcd(2), VectorXcd(2)};
    two.w[0] << 1.0, 0.0;
    two.w[1] << 0.0, 1.0;
    p = per_antenna_power(two);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(1.0));
}

TEST_CASE("total radiated power equals the sum of squared norms") {
    Rng rng(4);
    PrecoderSet ps;
    ps.w = {rng.cnormal_vector(5), rng.cnormal_vector(5), rng.cnormal_vector(5)};
    double want = 0.0;
    for (const auto& wk : ps.w) want += wk.squaredNorm();
    CHECK(per_antenna_power(ps).sum() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("scaling precoders scales powers quadratically") {
    Rng rng(5);
    PrecoderSet ps;
    ps.w = {rng.cnormal_vector(4), rng.cnormal_vector(4)};
    const VectorXd base = per_antenna_power(ps);
    for (auto& wk : ps.w) wk *= 0.3;
    const VectorXd scaled = per_antenna_power(ps);
    CHECK((scaled - 0.09 * base).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("beampattern: single antenna is flat, matched steering peaks at target") {
    PrecoderSet flat;
    flat.w = {VectorXcd::Ones(1)};
    Eigen::VectorXd grid(5);
    grid << -1.0, -0.5, 0.0, 0.5, 1.0;
    const Eigen::MatrixXd bp = beampattern(flat, grid);
    for (int j = 0; j < 5; ++j) CHECK(bp(0, j) == doctest::Approx(0.0).epsilon(1e-9));

    const double theta0 = deg_to_rad(20.0);
    PrecoderSet steer;
    steer.w = {ula_steering(theta0, 8) / std::sqrt(8.0)};
    Eigen::VectorXd fine(181);
    for (int j = 0; j <= 180; ++j) fine[j] = deg_to_rad(-90.0 + 1.0 * j);
    const Eigen::MatrixXd pat = beampattern(steer, fine);
    int argmax = 0;
    for (int j = 1; j <= 180; ++j)
        if (pat(0, j) > pat(0, argmax)) argmax = j;
    CHECK(fine[argmax] == doctest::Approx(theta0).epsilon(0.02));
    CHECK(pat.allFinite());
}

TEST_CASE("evaluate fills the report consistently") {
    const Scenario sc = two_user_orthogonal();
    PrecoderSet ps;
    ps.w = {VectorXcd(2), VectorXcd(2)};
    ps.w[0] << 1.0, 0.0;
    ps.w[1] << 0.0, 1.0;
    const MetricsReport m = evaluate(ps, sc);
    CHECK(m.min_sinr == doctest::Approx(1.0));
    CHECK(m.min_rate == doctest::Approx(1.0));  // log2(2)
    CHECK(m.pac_margin.minCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(!m.csv_row().empty());
}

TEST_CASE("brute force: single user two antennas hits the matched-filter value") {
    ScenarioConfig cfg;
    cfg.n_t = 2;
    cfg.total_power_dbw = 0.0;  // 1 W total, 0.5 W per antenna
    cfg.angles_deg = {0.0};
    cfg.groups = {1};
    const Scenario sc = build_scenario(cfg);
    // closed form (sum_n sqrt(P_n) |h_n|)^2 / sigma^2 = (2 sqrt(0.5))^2 = 2
    const double t = brute_force_fairness(sc, 16, 8, 2);
    CHECK(t == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("brute force: co-channel users in one group match the single-user value") {
    ScenarioConfig cfg;
    cfg.n_t = 2;
    cfg.total_power_dbw = 0.0;
    cfg.angles_deg = {25.0};
    cfg.groups = {1};
    const Scenario one = build_scenario(cfg);

    cfg.angles_deg = {25.0, 25.0};
    cfg.groups = {1, 1};
    const Scenario two = build_scenario(cfg);

    const double t1 = brute_force_fairness(one, 12, 6, 2);
    const double t2 = brute_force_fairness(two, 12, 6, 2);
    CHECK(t1 == doctest::Approx(t2).epsilon(1e-9));
}

TEST_CASE("brute force is monotone under grid refinement") {
    ScenarioConfig cfg;
    cfg.n_t = 2;
    cfg.total_power_dbw = 0.0;
    cfg.angles_deg = {18.0, -31.0};
    cfg.groups = {1, 2};
    const Scenario sc = build_scenario(cfg);
    const double coarse = brute_force_fairness(sc, 8, 4);
    const double fine = brute_force_fairness(sc, 16, 8);  // superset grid
    CHECK(fine >= coarse - 1e-12);
}

TEST_CASE("brute force refuses oversized grids with an estimate") {
    ScenarioConfig cfg;
    cfg.n_t = 2;
    cfg.angles_deg = {18.0, -31.0};
    cfg.groups = {1, 2};
    const Scenario sc = build_scenario(cfg);
    CHECK_THROWS_WITH_AS(brute_force_fairness(sc, 512, 128), doctest::Contains("points"),
                         std::invalid_argument);

    ScenarioConfig big;
    big.n_t = 4;
    big.angles_deg = {18.0, -31.0};
    big.groups = {1, 2};
    big.n_t = 8;
    CHECK_THROWS_AS(brute_force_fairness(build_scenario(big), 4, 2), std::invalid_argument);
}

TEST_CASE("precoder stacking round trip") {
    Rng rng(11);
    PrecoderSet ps;
    ps.w = {rng.cnormal_vector(3), rng.cnormal_vector(3)};
    const PrecoderSet back = PrecoderSet::from_stacked(ps.stacked(), 3, 2);
    for (int k = 0; k < 2; ++k)
        CHECK((back.w[k] - ps.w[k]).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(PrecoderSet::zero(3, 2).is_zero());
    CHECK(!ps.is_zero());
}
