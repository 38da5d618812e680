#include "varifolds/catalog.hpp"
#include "varifolds/varifold.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <memory>

using namespace varifolds;
using catalog::SurfaceCatalogEntry;

namespace {

SurfaceCatalogEntry entry(const std::string& name, const std::string& kind,
                          std::map<std::string, double> params, int m = 2) {
    SurfaceCatalogEntry e;
    e.name = name;
    e.kind = kind;
    e.params = std::move(params);
    e.m = m;
    return e;
}

std::shared_ptr<ParametricImmersion> flat_square() {
    auto imm = std::make_shared<ParametricImmersion>();
    imm->space = ModelSpace{3, 0.0};
    imm->m = 2;
    imm->domain = ParameterDomain{0, 1, 0, 1};
    imm->domain.boundary_edges = {BoundaryEdge{0, true}, BoundaryEdge{0, false},
                                  BoundaryEdge{1, true}, BoundaryEdge{1, false}};
    imm->eval = [](double u, double v) {
        Vec f(3);
        f << u, v, 0.0;
        return f;
    };
    return imm;
}

} // namespace

TEST_CASE("pullback metric: plane, round sphere chart, Clifford torus") {
    auto sq = flat_square();
    Mat g = pullback_metric(*sq, 0.3, 0.7);
    CHECK((g - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);

    double R = 1.7;
    auto sph = catalog::make_immersions(entry("s", "round_sphere", {{"radius", R}}))[0];
    for (double th : {0.4, 1.1, 2.6}) {
        Mat gs = pullback_metric(*sph, th, 1.3);
        CHECK(gs(0, 0) == Catch::Approx(R * R).epsilon(1e-12));
        CHECK(gs(0, 1) == Catch::Approx(0.0).margin(1e-12));
        CHECK(gs(1, 1) == Catch::Approx(R * R * std::sin(th) * std::sin(th)).epsilon(1e-12));
    }

    auto cl = catalog::make_immersions(entry("c", "clifford_torus", {{"b", 1.0}}))[0];
    Mat gc = pullback_metric(*cl, 0.9, 2.2);
    CHECK((gc - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    // rank deficiency raises
    auto degenerate = std::make_shared<ParametricImmersion>();
    degenerate->space = ModelSpace{3, 0.0};
    degenerate->m = 2;
    degenerate->domain = ParameterDomain{0, 1, 0, 1};
    degenerate->eval = [](double u, double) {
        Vec f(3);
        f << u, u, 0.0;
        return f;
    };
    CHECK_THROWS_AS(pullback_metric(*degenerate, 0.5, 0.5), DegenerateImmersionError);
}

TEST_CASE("mean curvature: round sphere, Clifford torus, geodesic spheres") {
    double R = 0.8;
    auto sph = catalog::make_immersions(entry("s", "round_sphere", {{"radius", R}}))[0];
    for (double th : {0.5, 1.5, 2.8}) {
        TangentVector H = mean_curvature(*sph, th, 0.7);
        CHECK(sph->space.norm(H) == Catch::Approx(2.0 / R).epsilon(1e-10));
        // points inward: negative component along the outward radius
        Vec radial = H.base.coords; // centre is the origin
        CHECK(sph->space.form(H.components, radial) < 0.0);
    }

    auto cl = catalog::make_immersions(entry("c", "clifford_torus", {{"b", 1.0}}))[0];
    for (double u : {0.0, 1.0, 4.0}) {
        TangentVector H = mean_curvature(*cl, u, 2.0 * u + 0.3);
        CHECK(cl->space.norm(H) < 1e-8);
    }

    for (double b : {1.0, 2.0}) {
        double rho = 0.6;
        auto gs =
            catalog::make_immersions(entry("g", "geodesic_sphere", {{"b", b}, {"rho", rho}}))[0];
        double expected = 2.0 * std::sqrt(b) / std::tan(std::sqrt(b) * rho);
        for (double th : {0.3, 1.2}) {
            TangentVector H = mean_curvature(*gs, th, 2.0);
            CHECK(gs->space.norm(H) == Catch::Approx(expected).epsilon(1e-9));
        }
    }
    {
        double rho = 0.9;
        auto gh = catalog::make_immersions(
            entry("g", "geodesic_sphere", {{"b", -1.0}, {"rho", rho}}))[0];
        double expected = 2.0 / std::tanh(rho);
        TangentVector H = mean_curvature(*gh, 1.0, 0.5);
        CHECK(gh->space.norm(H) == Catch::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("finite-difference jets agree with analytic jets at O(h^2) or better") {
    auto sph = catalog::make_immersions(entry("s", "round_sphere", {{"radius", 1.3}}))[0];
    ParametricImmersion fd = *sph;
    fd.analytic_jet = nullptr;
    for (double th : {0.7, 2.1}) {
        Jet2 A = sph->analytic_jet(th, 1.1);
        Jet2 F = fd.fd_jet(th, 1.1);
        CHECK((A.fu - F.fu).norm() < 1e-10);
        CHECK((A.fv - F.fv).norm() < 1e-10);
        CHECK((A.fuu - F.fuu).norm() < 1e-7);
        CHECK((A.fuv - F.fuv).norm() < 1e-7);
        CHECK((A.fvv - F.fvv).norm() < 1e-7);
    }
    // plain central first derivative converges at O(h^2)
    Jet2 A = sph->analytic_jet(0.9, 0.4);
    auto d1err = [&](double h) {
        ParametricImmersion c = fd;
        c.fd_step_rel = h;
        Vec fu, fv;
        c.d1(0.9, 0.4, fu, fv);
        return (fu - A.fu).norm();
    };
    double e1 = d1err(4e-3), e2 = d1err(2e-3);
    CHECK(e1 / std::max(e2, 1e-15) > 3.5);

    // mean curvature through the finite-difference jet stays accurate
    TangentVector H = mean_curvature(fd, 0.9, 0.4);
    CHECK(fd.space.norm(H) == Catch::Approx(2.0 / 1.3).epsilon(1e-6));
}

TEST_CASE("sample_varifold: flat square exact, sphere areas, H orthogonality") {
    QuadratureSpec spec;
    spec.cells_u = spec.cells_v = 16;
    auto sq = flat_square();
    SampledVarifold vsq = sample_varifold(sq, spec);
    CHECK(vsq.total_weight() == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(vsq.boundary_weight() == Catch::Approx(4.0).epsilon(1e-12));

    QuadratureSpec s64;
    s64.cells_u = s64.cells_v = 64;
    auto sph = catalog::make_immersions(entry("s", "round_sphere", {{"radius", 1.0}}))[0];
    SampledVarifold vs = sample_varifold(sph, s64);
    CHECK(std::abs(vs.total_weight() - 4.0 * kPi) < 1e-10);

    double rho = 0.8;
    auto gs = catalog::make_immersions(entry("g", "geodesic_sphere", {{"b", 1.0}, {"rho", rho}}))[0];
    SampledVarifold vg = sample_varifold(gs, s64);
    CHECK(std::abs(vg.total_weight() - 4.0 * kPi * std::sin(rho) * std::sin(rho)) < 1e-8);

    auto gh = catalog::make_immersions(entry("h", "geodesic_sphere", {{"b", -1.0}, {"rho", rho}}))[0];
    SampledVarifold vh = sample_varifold(gh, s64);
    CHECK(std::abs(vh.total_weight() - 4.0 * kPi * std::sinh(rho) * std::sinh(rho)) < 1e-8);

    // H orthogonality at every node: |g(H, e_i)| < 1e-7 |H|
    for (const SampledVarifold* V : {&vs, &vg, &vh}) {
        double worst = 0.0;
        for (const auto& a : V->atoms) {
            double h = V->space.norm(a.H);
            if (h < 1e-12) continue;
            double t = 0.0;
            for (int c = 0; c < a.plane.m(); ++c)
                t += std::abs(V->space.form(a.H.components, a.plane.frame.col(c)));
            worst = std::max(worst, t / h);
        }
        CHECK(worst < 1e-7);
    }
}

TEST_CASE("quadrature convergence: spectral-grade decay on catalog spheres") {
    auto sph = catalog::make_immersions(entry("s", "round_sphere", {{"radius", 1.0}}))[0];
    auto areaerr = [&](int n) {
        QuadratureSpec spec;
        spec.cells_u = spec.cells_v = n;
        return std::abs(sample_varifold(sph, spec).total_weight() - 4.0 * kPi);
    };
    double e4 = areaerr(4), e8 = areaerr(8), e16 = areaerr(16);
    CHECK(e8 < e4 / 10.0 + 1e-12);
    CHECK(e16 < e8 / 10.0 + 1e-12);
    double e32 = areaerr(32), e64 = areaerr(64);
    CHECK(e64 < e32 / 10.0 + 1e-12);
}

TEST_CASE("willmore energy and the three Willmore equality anchors") {
    QuadratureSpec spec;
    spec.cells_u = spec.cells_v = 48;
    auto sph = catalog::make_immersions(entry("s", "round_sphere", {{"radius", 1.0}}))[0];
    SampledVarifold vs = sample_varifold(sph, spec);
    CHECK(std::abs(willmore_energy(vs) - 4.0 * kPi) < 1e-8);
    CHECK(std::abs(total_mean_curvature(vs) - 8.0 * kPi) < 1e-8);

    double rho = 0.7;
    auto gs = catalog::make_immersions(entry("g", "geodesic_sphere", {{"b", 1.0}, {"rho", rho}}))[0];
    SampledVarifold vg = sample_varifold(gs, spec);
    CHECK(std::abs(willmore_energy(vg) + area(vg) - 4.0 * kPi) < 1e-7);

    auto gh = catalog::make_immersions(entry("h", "geodesic_sphere", {{"b", -1.0}, {"rho", rho}}))[0];
    SampledVarifold vh = sample_varifold(gh, spec);
    CHECK(std::abs(willmore_energy(vh) - area(vh) - 4.0 * kPi) < 1e-7);
}

TEST_CASE("multiplicity_at: embedded sphere, tangent pair, off-surface point") {
    auto imms = catalog::make_immersions(entry("p", "tangent_sphere_pair", {{"radius", 1.0}}));
    std::vector<const ParametricImmersion*> charts{imms[0].get(), imms[1].get()};
    Vec origin = Vec::Zero(3);
    CHECK(multiplicity_at(charts, Point{origin}, 0.2) == 2);
    Vec onUpper(3);
    onUpper << 1.0, 0.0, 1.0;
    CHECK(multiplicity_at(charts, Point{onUpper}, 0.2) == 1);
    Vec off(3);
    off << 5.0, 5.0, 5.0;
    CHECK(multiplicity_at(charts, Point{off}, 0.2) == 0);
    CHECK(multiplicity_at(*imms[0], Point{onUpper}, 0.2) == 1);
}

TEST_CASE("tangent planes of the two spheres agree at the tangency point") {
    auto imms = catalog::make_immersions(entry("p", "tangent_sphere_pair", {{"radius", 1.0}}));
    // the tangency point is the theta = pi pole of the upper chart and the
    // theta = 0 pole of the lower one; both planes must approach {z = 0}
    for (auto [imm, th] : {std::pair{imms[0], kPi - 1e-5}, std::pair{imms[1], 1e-5}}) {
        Jet2 J = imm->analytic_jet(th, 0.3);
        CHECK(std::abs(J.fu[2]) / J.fu.norm() < 1e-4);
        CHECK(std::abs(J.fv[2]) / std::max(J.fv.norm(), 1e-30) < 1e-4);
    }
}

TEST_CASE("extrinsic diameter: spheres, Clifford torus, degenerate input") {
    QuadratureSpec spec;
    spec.cells_u = spec.cells_v = 32;
    auto sph = catalog::make_immersions(entry("s", "round_sphere", {{"radius", 1.0}}))[0];
    SampledVarifold vs = sample_varifold(sph, spec);
    DiameterEstimate ds = extrinsic_diameter(vs);
    CHECK(std::abs(ds.value - 2.0) < 1e-7);
    CHECK(ds.mesh_gap > 0.0);

    auto cl = catalog::make_immersions(entry("c", "clifford_torus", {{"b", 1.0}}))[0];
    SampledVarifold vc = sample_varifold(cl, spec);
    DiameterEstimate dc = extrinsic_diameter(vc);
    CHECK(std::abs(dc.value - kPi) < 1e-7);

    // pruning agrees with the brute-force scan at low resolution
    QuadratureSpec tiny;
    tiny.cells_u = tiny.cells_v = 5;
    SampledVarifold vt = sample_varifold(cl, tiny);
    double brute = 0.0;
    for (size_t i = 0; i < vt.atoms.size(); ++i)
        for (size_t j = i + 1; j < vt.atoms.size(); ++j)
            brute = std::max(brute, distance(vt.space, vt.atoms[i].point, vt.atoms[j].point));
    CHECK(extrinsic_diameter(vt).value == Catch::Approx(brute));

    SampledVarifold single = vs;
    single.atoms.resize(1);
    CHECK(extrinsic_diameter(single).value == 0.0);
}

TEST_CASE("boundary atoms: disk arclength, outward conormal, hyperbolic disk, circle") {
    QuadratureSpec spec;
    spec.cells_u = spec.cells_v = 32;
    auto disk = catalog::make_immersions(entry("d", "flat_disk", {{"rho", 1.0}}))[0];
    SampledVarifold vd = sample_varifold(disk, spec);
    CHECK(std::abs(vd.boundary_weight() - 2.0 * kPi) < 1e-10);
    CHECK(std::abs(vd.total_weight() - kPi) < 1e-12);
    for (const auto& b : vd.boundary) {
        // outward radial conormal on the unit circle
        Vec radial = b.point.coords / b.point.coords.norm();
        CHECK((b.conormal.components - radial).norm() < 1e-10);
    }

    auto hdisk = catalog::make_immersions(entry("hd", "flat_disk", {{"rho", 1.0}, {"b", -1.0}}))[0];
    SampledVarifold vh = sample_varifold(hdisk, spec);
    CHECK(std::abs(vh.total_weight() - 2.0 * kPi * (std::cosh(1.0) - 1.0)) < 1e-10);
    CHECK(std::abs(vh.boundary_weight() - 2.0 * kPi * std::sinh(1.0)) < 1e-10);
    for (const auto& a : vh.atoms) CHECK(vh.space.norm(a.H) < 1e-9); // totally geodesic

    // geodesic circle (m = 1): length and curvature cot(rho)
    auto circ =
        catalog::make_immersions(entry("gc", "geodesic_circle", {{"b", 1.0}, {"rho", kPi / 3}}, 1));
    SampledVarifold vc = sample_varifold(circ[0], spec);
    CHECK(vc.m == 1);
    CHECK(std::abs(vc.total_weight() - 2.0 * kPi * std::sin(kPi / 3)) < 1e-10);
    for (const auto& a : vc.atoms)
        CHECK(vc.space.norm(a.H) == Catch::Approx(1.0 / std::tan(kPi / 3)).epsilon(1e-9));
}

TEST_CASE("sampling failure modes: non-finite evaluation is reported with the node") {
    auto bad = std::make_shared<ParametricImmersion>();
    bad->space = ModelSpace{3, 0.0};
    bad->m = 2;
    bad->domain = ParameterDomain{0, 1, 0, 1};
    bad->eval = [](double u, double v) {
        Vec f(3);
        f << u, v, (u > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0);
        return f;
    };
    QuadratureSpec spec;
    spec.cells_u = spec.cells_v = 4;
    CHECK_THROWS_AS(sample_varifold(bad, spec), DegenerateImmersionError);
    try {
        sample_varifold(bad, spec);
    } catch (const DegenerateImmersionError& ex) {
        CHECK(std::string(ex.what()).find("cell") != std::string::npos);
    }
}
