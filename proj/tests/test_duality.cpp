#include <cmath>
#include <vector>

#include "doctest.h"
#include "seedbank/duality.hpp"
#include "seedbank/lattice.hpp"

using namespace seedbank;

namespace {

ModelParams ring_model(int side, double K, double e, double d) {
    ModelParams p;
    p.model = 1;
    p.mig = WalkKernel::simple(Torus(1, side), 1.0);
    p.sb = SeedBankSpec::single(K, e);
    p.g = DiffusionFunction::fisher_wright(d);
    return p;
}

ModelParams colony_model(double K, double e, DiffusionFunction g) {
    ModelParams p;
    p.model = 1;
    p.mig = WalkKernel::point_mass(Torus(1, 1), {0}, 1.0);
    p.sb = SeedBankSpec::single(K, e);
    p.g = g;
    return p;
}

ModelParams displaced_model(int side) {
    ModelParams p;
    p.model = 3;
    p.mig = WalkKernel::simple(Torus(1, side), 1.0);
    p.sb = SeedBankSpec::single(1.0, 0.8);
    p.disp = WalkKernel::from_offsets(Torus(1, side), {{{1}, 0.7}, {{-2}, 0.3}});
    p.g = DiffusionFunction::fisher_wright(1.0);
    return p;
}

// fixed quasi-random profile in (0,1), reproducible without an rng
std::vector<double> profile(std::int64_t n, double phase) {
    std::vector<double> v(static_cast<size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        v[static_cast<size_t>(i)] = 0.5 + 0.42 * std::sin(2.399963 * static_cast<double>(i) + phase);
    return v;
}

} // namespace

TEST_CASE("moment spec bookkeeping and guards") {
    const Torus t(1, 6);
    const auto spec = MomentSpec::from_lineages(t, 2, {{0, 0}, {0, 0}, {3, 1}, {5, 2}});
    CHECK(spec.degree() == 4);
    CHECK(spec.powers.at(0 * 3 + 0) == 2);
    CHECK(spec.powers.at(3 * 3 + 1) == 1);
    CHECK(spec.powers.at(5 * 3 + 2) == 1);

    const auto lin = spec.lineages(2);
    REQUIRE(lin.size() == 4);
    CHECK(lin[0] == std::pair<std::int64_t, int>{0, 0});
    CHECK(lin[1] == std::pair<std::int64_t, int>{0, 0});
    CHECK(lin[2] == std::pair<std::int64_t, int>{3, 1});
    CHECK(lin[3] == std::pair<std::int64_t, int>{5, 2});

    // the degree cap is enforced, as are component ranges
    CHECK_THROWS_AS(MomentSpec::from_lineages(t, 2, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}),
                    ConfigError);
    CHECK_THROWS_AS(MomentSpec::from_lineages(t, 2, {{6, 0}}), ConfigError);
    CHECK_THROWS_AS(MomentSpec::from_lineages(t, 2, {{0, 3}}), ConfigError);
    MomentSpec empty;
    CHECK_THROWS_AS(empty.validate(t, 2), ConfigError);
}

TEST_CASE("generator identity: forward and dual agree on monomials") {
    // the same monomial read as a function of the field or of the lineage
    // counts must produce identical generator values; this pins the factor
    // between the noise amplitude and the coalescence rate
    {
        ModelParams p = ring_model(5, 2.0, 0.7, 1.7);
        p.mig = WalkKernel::simple(Torus(1, 5), 0.8);
        const auto rep = generator_identity_check(p, 20, 11);
        CHECK(rep.probes == 20);
        CHECK(rep.maxResidual <= 1e-10);
    }
    {
        ModelParams p;
        p.model = 2;
        p.mig = WalkKernel::simple(Torus(1, 4), 1.0);
        p.sb = SeedBankSpec::explicit_list({1.5, 0.4}, {0.9, 0.3});
        p.g = DiffusionFunction::fisher_wright(1.0);
        const auto rep = generator_identity_check(p, 20, 12);
        CHECK(rep.maxResidual <= 1e-10);
    }
    {
        const auto rep = generator_identity_check(displaced_model(5), 20, 13);
        CHECK(rep.maxResidual <= 1e-10);
    }
    {
        // deep truncated colour ladder
        ModelParams p;
        p.model = 2;
        p.mig = WalkKernel::simple(Torus(1, 3), 1.0);
        p.sb = SeedBankSpec::asymptotic(1.0, 0.5, 1.0, 1.0, 6);
        p.g = DiffusionFunction::fisher_wright(0.9);
        const auto rep = generator_identity_check(p, 10, 14);
        CHECK(rep.maxResidual <= 1e-10);
    }
}

TEST_CASE("lineage kernel: conservation, occupation limit, bare-walk continuity") {
    // rows are probability distributions for every model
    {
        ModelParams p;
        p.model = 2;
        p.mig = WalkKernel::simple(Torus(1, 5), 1.0);
        p.sb = SeedBankSpec::explicit_list({2.0, 0.5}, {1.0, 0.25});
        p.g = DiffusionFunction::fisher_wright(1.0);
        const auto row = bkernel_row(p, 1.7, 2, 0);
        double sum = 0;
        for (double v : row) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        const auto row = bkernel_row(displaced_model(5), 2.3, 1, 1);
        double sum = 0;
        for (double v : row) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    // long-run active occupation 1/(1+K)
    {
        ModelParams p = colony_model(3.0, 1.0, DiffusionFunction::fisher_wright(1.0));
        const auto row = bkernel_row(p, 60.0, 0, 0);
        CHECK(row[0] == doctest::Approx(0.25).epsilon(1e-6));
        CHECK(row[1] == doctest::Approx(0.75).epsilon(1e-6));
    }

    // K e -> 0: the active marginal degenerates to the bare walk
    {
        ModelParams p = ring_model(6, 1e-8, 1e-8, 1.0);
        const auto row = bkernel_row(p, 0.7, 0, 0);
        for (std::int64_t j = 0; j < 6; ++j) {
            const double walk =
                transition_probability(p.mig, 0.7, {static_cast<int>(j)});
            CHECK(std::abs(row[static_cast<size_t>(2 * j)] - walk) <= 1e-6);
        }
    }
}

TEST_CASE("mean field: preserved mixture, constant profiles, zero time") {
    ModelParams p;
    p.model = 2;
    p.mig = WalkKernel::simple(Torus(1, 4), 1.0);
    p.sb = SeedBankSpec::explicit_list({1.5, 0.4}, {0.9, 0.3});
    p.g = DiffusionFunction::kimura_ohta(1.0); // noise never enters first moments
    const std::int64_t V = 4;

    const auto x0 = profile(V, 0.3);
    const auto y0 = profile(2 * V, 1.1);

    // zero time returns the profile
    const auto mf0 = first_moment(p, x0, y0, 0.0);
    for (std::int64_t i = 0; i < V; ++i)
        CHECK(mf0.x[static_cast<size_t>(i)] == doctest::Approx(x0[static_cast<size_t>(i)]));

    // the preserved mixture of the mean field never moves
    SystemState s0;
    s0.torus = Torus(1, 4);
    s0.colours = 2;
    s0.x = x0;
    s0.y = y0;
    const double th0 = theta_of_state(p, s0);
    const auto mf = first_moment(p, x0, y0, 1.3);
    SystemState s1 = s0;
    s1.x = mf.x;
    s1.y = mf.y;
    CHECK(theta_of_state(p, s1) == doctest::Approx(th0).epsilon(1e-9));

    // constant profiles are fixed points of the mean flow, displaced model too
    {
        ModelParams q = displaced_model(5);
        const std::vector<double> cx(5, 0.37), cy(5, 0.37);
        const auto mfc = first_moment(q, cx, cy, 0.9);
        for (double v : mfc.x) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
        for (double v : mfc.y) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
    }
}

TEST_CASE("mean field matches forward replicas, fisher-wright and kimura-ohta") {
    // first moments are governed by the lineage kernel alone; the simulation
    // must reproduce them for any noise shape
    {
        ModelParams p = ring_model(8, 1.5, 0.8, 1.0);
        const auto x0 = profile(8, 0.0);
        const auto y0 = profile(8, 2.2);
        const auto exact = first_moment(p, x0, y0, 1.0);
        const auto est = forward_mean_field(p, InitSpec::explicit_values(x0, y0), 1.0, 4000, 99);
        for (std::int64_t i = 0; i < 8; ++i) {
            const auto& m = est.x[static_cast<size_t>(i)];
            CHECK(std::abs(m.mean - exact.x[static_cast<size_t>(i)]) <= 3.5 * m.se + 1.5e-3);
        }
        for (std::int64_t i = 0; i < 8; ++i) {
            const auto& m = est.y[static_cast<size_t>(i)];
            CHECK(std::abs(m.mean - exact.y[static_cast<size_t>(i)]) <= 3.5 * m.se + 1.5e-3);
        }
    }
    {
        ModelParams p = ring_model(4, 1.0, 0.6, 1.0);
        p.g = DiffusionFunction::kimura_ohta(1.2);
        const auto x0 = profile(4, 0.7);
        const auto y0 = profile(4, 1.9);
        const auto exact = first_moment(p, x0, y0, 0.8);
        const auto est = forward_mean_field(p, InitSpec::explicit_values(x0, y0), 0.8, 3000, 7);
        for (std::int64_t i = 0; i < 4; ++i) {
            CHECK(std::abs(est.x[static_cast<size_t>(i)].mean - exact.x[static_cast<size_t>(i)]) <=
                  3.5 * est.x[static_cast<size_t>(i)].se + 1e-3);
            CHECK(std::abs(est.y[static_cast<size_t>(i)].mean - exact.y[static_cast<size_t>(i)]) <=
                  3.5 * est.y[static_cast<size_t>(i)].se + 1e-3);
        }
    }
    {
        // displaced exchange: the reversed kernel in the drift is what makes
        // the mean flow match the lineage kernel
        ModelParams p = displaced_model(5);
        const auto x0 = profile(5, 1.4);
        const auto y0 = profile(5, 0.2);
        const auto exact = first_moment(p, x0, y0, 0.8);
        const auto est = forward_mean_field(p, InitSpec::explicit_values(x0, y0), 0.8, 3000, 31);
        for (std::int64_t i = 0; i < 5; ++i) {
            CHECK(std::abs(est.x[static_cast<size_t>(i)].mean - exact.x[static_cast<size_t>(i)]) <=
                  3.5 * est.x[static_cast<size_t>(i)].se + 1.5e-3);
            CHECK(std::abs(est.y[static_cast<size_t>(i)].mean - exact.y[static_cast<size_t>(i)]) <=
                  3.5 * est.y[static_cast<size_t>(i)].se + 1.5e-3);
        }
    }
}

TEST_CASE("moment duality: exact edge cases") {
    ModelParams p = ring_model(4, 1.0, 0.5, 1.0);
    const auto spec = MomentSpec::from_lineages(Torus(1, 4), 1, {{0, 0}, {0, 0}, {1, 0}});

    // all-ones state is absorbing on both sides
    {
        const auto o = duality_gap(p, spec, 1.0, InitSpec::constant(1.0, 1.0), 100, 100, 5);
        CHECK(o.forward.mean == 1.0);
        CHECK(o.forward.se == 0.0);
        CHECK(o.dual.mean == 1.0);
        CHECK(o.gap == 0.0);
        CHECK(o.zscore == 0.0);
    }
    // all-zeros likewise
    {
        const auto o = duality_gap(p, spec, 1.0, InitSpec::constant(0.0, 0.0), 100, 100, 5);
        CHECK(o.forward.mean == 0.0);
        CHECK(o.dual.mean == 0.0);
        CHECK(o.zscore == 0.0);
    }
    // zero horizon evaluates the monomial on the initial profile exactly
    {
        const auto x0 = profile(4, 0.5);
        const auto y0 = profile(4, 1.7);
        const auto init = InitSpec::explicit_values(x0, y0);
        const double want = x0[0] * x0[0] * x0[1];
        const auto o = duality_gap(p, spec, 0.0, init, 50, 50, 5);
        CHECK(o.forward.mean == doctest::Approx(want).epsilon(1e-14));
        CHECK(o.dual.mean == doctest::Approx(want).epsilon(1e-14));
        CHECK(o.gap == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("moment duality on a ring and the rate convention probe") {
    // a small battery across degrees, sites and layers
    {
        ModelParams p = ring_model(8, 1.2, 0.6, 1.0);
        const Torus t(1, 8);
        const InitSpec init = InitSpec::constant(0.35, 0.65);
        const std::vector<MomentSpec> specs = {
            MomentSpec::from_lineages(t, 1, {{0, 0}}),
            MomentSpec::from_lineages(t, 1, {{0, 0}, {0, 0}}),
            MomentSpec::from_lineages(t, 1, {{0, 0}, {4, 0}}),
            MomentSpec::from_lineages(t, 1, {{0, 0}, {0, 1}}),
            MomentSpec::from_lineages(t, 1, {{0, 0}, {0, 0}, {3, 0}, {5, 1}}),
        };
        int within = 0, total = 0;
        for (const auto& spec : specs)
            for (double T : {0.4, 1.2}) {
                const auto o = duality_gap(p, spec, T, init, 4000, 8000, 401);
                ++total;
                CHECK(std::abs(o.zscore) <= 4.0);
                if (std::abs(o.zscore) <= 3.0) ++within;
            }
        CHECK(within >= total - 1);
    }
    // two colours
    {
        ModelParams p;
        p.model = 2;
        p.mig = WalkKernel::simple(Torus(1, 6), 1.0);
        p.sb = SeedBankSpec::explicit_list({1.5, 0.4}, {0.9, 0.3});
        p.g = DiffusionFunction::fisher_wright(1.0);
        const auto spec =
            MomentSpec::from_lineages(Torus(1, 6), 2, {{0, 0}, {2, 2}});
        const auto o = duality_gap(p, spec, 1.0, InitSpec::constant(0.4, 0.7), 4000, 8000, 402);
        CHECK(std::abs(o.zscore) <= 4.0);
    }
    // displaced exchange
    {
        ModelParams p = displaced_model(5);
        const auto spec = MomentSpec::from_lineages(Torus(1, 5), 1, {{0, 0}, {2, 0}});
        const auto o = duality_gap(p, spec, 1.0, InitSpec::constant(0.35, 0.6), 4000, 8000, 403);
        CHECK(std::abs(o.zscore) <= 4.0);
    }
    // convention probe: doubling the coalescence rate must blow the gap up
    {
        ModelParams p = colony_model(1.0, 1.0, DiffusionFunction::fisher_wright(1.0));
        const auto spec = MomentSpec::from_lineages(Torus(1, 1), 1, {{0, 0}, {0, 0}});
        const InitSpec init = InitSpec::constant(0.5, 0.5);

        const auto ok = duality_gap(p, spec, 1.0, init, 20000, 20000, 404);
        CHECK(std::abs(ok.zscore) <= 3.5);

        ModelParams wrong = p;
        wrong.g = DiffusionFunction::fisher_wright(2.0);
        const auto fwd = forward_moment(p, spec, 1.0, init, 20000, 404);
        const auto bad = dual_moment(wrong, spec.lineages(1), 1.0, init, 20000, 404);
        const double z =
            (fwd.mean - bad.mean) / std::sqrt(fwd.se * fwd.se + bad.se * bad.se);
        // coalescence strips factors of z < 1, so doubling its rate inflates
        // the dual moment and the signed gap goes sharply negative
        CHECK(z < -5.0);
    }
}

TEST_CASE("closed second moment march: grid convergence and simulation agreement") {
    // single colony, symmetric start: the first moment stays at 1/2 and the
    // variance grows; the march must converge in the grid and match the
    // replica estimate
    ModelParams p = colony_model(1.0, 1.0, DiffusionFunction::fisher_wright(1.0));
    const std::vector<double> x0{0.5}, y0{0.5};

    const auto coarse = second_moment_fw(p, x0, y0, 0, 0, 1.0, 300);
    const auto fine = second_moment_fw(p, x0, y0, 0, 0, 1.0, 600);
    CHECK(std::abs(coarse.value - fine.value) <= 3e-5);
    CHECK(fine.twoWalk == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(fine.value - fine.twoWalk > 0.01); // genuine variance accumulates

    const auto spec = MomentSpec::from_lineages(Torus(1, 1), 1, {{0, 0}, {0, 0}});
    ForwardRunOptions fo;
    fo.dt = 1e-3;
    const auto mc = forward_moment(p, spec, 1.0, InitSpec::constant(0.5, 0.5), 20000, 17, fo);
    CHECK(std::abs(mc.mean - fine.value) <= 3.5 * mc.se + 5e-4);

    // zero horizon and index symmetry on a ring
    ModelParams q = ring_model(4, 1.0, 0.5, 1.0);
    const auto xq = profile(4, 0.9), yq = profile(4, 0.1);
    const auto at0 = second_moment_fw(q, xq, yq, 0, 2, 0.0);
    CHECK(at0.value == doctest::Approx(xq[0] * xq[2]).epsilon(1e-14));
    const auto ab = second_moment_fw(q, xq, yq, 0, 2, 0.8, 240);
    const auto ba = second_moment_fw(q, xq, yq, 2, 0, 0.8, 240);
    CHECK(ab.value == doctest::Approx(ba.value).epsilon(1e-13));

    const auto spec02 = MomentSpec::from_lineages(Torus(1, 4), 1, {{0, 0}, {2, 0}});
    const auto mc02 =
        forward_moment(q, spec02, 0.8, InitSpec::explicit_values(xq, yq), 12000, 18, fo);
    CHECK(std::abs(mc02.mean - ab.value) <= 3.5 * mc02.se + 1e-3);
}

TEST_CASE("plug-in moment relation holds for general diffusion") {
    // endpoint product minus the relation, replica by replica, should be a
    // mean-zero sample; this works for noise shapes with no dual at all
    {
        ModelParams p = ring_model(4, 1.0, 0.5, 1.0);
        const auto chk = second_moment_plugin_check(p, InitSpec::constant(0.3, 0.6), 0, 2, 0.9,
                                                    6000, 57, 48);
        CHECK(std::abs(chk.zscore) <= 3.5);
        // three-way agreement with the closed march
        const std::vector<double> x0(4, 0.3), y0(4, 0.6);
        const auto oracle = second_moment_fw(p, x0, y0, 0, 2, 0.9, 400);
        CHECK(std::abs(chk.relation.mean - oracle.value) <= 3.5 * chk.relation.se + 1e-3);
    }
    {
        ModelParams p = colony_model(1.0, 1.0, DiffusionFunction::kimura_ohta(1.5));
        const auto chk = second_moment_plugin_check(p, InitSpec::constant(0.4, 0.7), 0, 0, 1.2,
                                                    6000, 58, 64);
        CHECK(std::abs(chk.zscore) <= 3.5);
    }
    {
        // tabulated noise: a triangular profile, zero at the boundaries
        std::vector<double> tab{0.0, 0.2, 0.4, 0.6, 0.8, 0.6, 0.4, 0.2, 0.0};
        ModelParams p = colony_model(0.8, 1.1, DiffusionFunction::tabulated(tab));
        const auto chk = second_moment_plugin_check(p, InitSpec::constant(0.45, 0.5), 0, 0, 0.8,
                                                    4000, 59, 48);
        CHECK(std::abs(chk.zscore) <= 3.5);
    }
    {
        ModelParams p = ring_model(4, 1.0, 0.5, 1.0);
        CHECK_THROWS_AS(
            second_moment_plugin_check(p, InitSpec::iid_uniform(), 0, 1, 0.5, 100, 1, 8),
            ConfigError);
    }
}

TEST_CASE("moment estimators are deterministic and thread-invariant") {
    ModelParams p = ring_model(6, 1.0, 0.5, 1.0);
    const auto spec = MomentSpec::from_lineages(Torus(1, 6), 1, {{0, 0}, {3, 0}});
    const InitSpec init = InitSpec::iid_uniform();

    ForwardRunOptions one;
    one.threads = 1;
    ForwardRunOptions three;
    three.threads = 3;
    const auto a = forward_moment(p, spec, 0.7, init, 600, 123, one);
    const auto b = forward_moment(p, spec, 0.7, init, 600, 123, three);
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);

    const auto ma = forward_mean_field(p, init, 0.5, 300, 77, one);
    const auto mb = forward_mean_field(p, init, 0.5, 300, 77, three);
    for (size_t i = 0; i < ma.x.size(); ++i) CHECK(ma.x[i].mean == mb.x[i].mean);

    const auto ga = duality_gap(p, spec, 0.6, init, 400, 400, 9, one, 1);
    const auto gb = duality_gap(p, spec, 0.6, init, 400, 400, 9, three, 2);
    CHECK(ga.gap == gb.gap);
    CHECK(ga.zscore == gb.zscore);
}
