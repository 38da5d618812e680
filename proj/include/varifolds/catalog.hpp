#pragma once

#include "varifolds/varifold.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace varifolds::catalog {

struct KnownValue {
    double value = 0.0;
    std::string provenance;
};

/// Declarative description of an analytic test surface with its known
/// closed-form quantities.
struct SurfaceCatalogEntry {
    std::string name;
    std::string kind;
    int m = 2;
    std::map<std::string, double> params;
    std::map<std::string, KnownValue> known; // area, willmore, d_ext, ...
    bool minimal = false;
    bool closed = true;
    bool connected = true;
    std::vector<std::pair<std::vector<double>, int>> multiplicity_points;
    std::string multiplicity_provenance;

    double param(const std::string& key) const {
        auto it = params.find(key);
        if (it == params.end())
            throw InputError("catalog entry '" + name + "': missing parameter '" + key + "'");
        return it->second;
    }
    std::optional<double> known_value(const std::string& key) const {
        auto it = known.find(key);
        if (it == known.end()) return std::nullopt;
        return it->second.value;
    }
};

/// A catalog entry realised at a concrete resolution.
struct BuiltSurface {
    SurfaceCatalogEntry entry;
    SampledVarifold varifold;
    Point basepoint; // reference point on the support
    Point center;    // enclosing centre (sphere/disk centre, tangency point)
    std::vector<std::shared_ptr<const ParametricImmersion>> immersions;
};

namespace detail {

inline Vec stdvec(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

/// f = A + B u(theta, phi) with u the unit sphere direction in the constant
/// frame {E1, E2, E3}; covers round spheres and geodesic spheres.
inline std::shared_ptr<ParametricImmersion> sphere_chart(const ModelSpace& space, Vec A, double B,
                                                         Mat E, const std::string& name) {
    auto imm = std::make_shared<ParametricImmersion>();
    imm->space = space;
    imm->m = 2;
    imm->name = name;
    imm->domain.u0 = 0.0;
    imm->domain.u1 = kPi;
    imm->domain.v0 = 0.0;
    imm->domain.v1 = 2.0 * kPi;
    imm->domain.periodic_v = true;
    imm->domain.pole_u_min = imm->domain.pole_u_max = true;
    imm->eval = [A, B, E](double th, double ph) {
        Vec u = std::sin(th) * std::cos(ph) * E.col(0) + std::sin(th) * std::sin(ph) * E.col(1) +
                std::cos(th) * E.col(2);
        return (A + B * u).eval();
    };
    imm->analytic_jet = [A, B, E](double th, double ph) {
        double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
        Vec u = st * cp * E.col(0) + st * sp * E.col(1) + ct * E.col(2);
        Jet2 J;
        J.f = A + B * u;
        J.fu = B * (ct * cp * E.col(0) + ct * sp * E.col(1) - st * E.col(2));
        J.fv = B * (-st * sp * E.col(0) + st * cp * E.col(1));
        J.fuu = -B * u;
        J.fuv = B * (-ct * sp * E.col(0) + ct * cp * E.col(1));
        J.fvv = B * (-st * cp * E.col(0) - st * sp * E.col(1));
        return J;
    };
    return imm;
}

/// Geodesic disk: f(s, theta) = cs(s) C + sn(s) w(theta) about the centre C
/// with tangent frame {E1, E2}; flat disk for b = 0.
inline std::shared_ptr<ParametricImmersion> disk_chart(const ModelSpace& space, Vec C, double rho,
                                                       Mat E, const std::string& name) {
    auto imm = std::make_shared<ParametricImmersion>();
    imm->space = space;
    imm->m = 2;
    imm->name = name;
    imm->domain.u0 = 0.0;
    imm->domain.u1 = rho;
    imm->domain.v0 = 0.0;
    imm->domain.v1 = 2.0 * kPi;
    imm->domain.periodic_v = true;
    imm->domain.pole_u_min = true;
    imm->domain.boundary_edges.push_back(BoundaryEdge{0, false});
    const double b = space.b;
    auto scalars = [b](double s, double& cs, double& sn, double& dcs, double& dsn, double& ddcs,
                       double& ddsn) {
        if (b == 0.0) {
            cs = 1.0;
            sn = s;
            dcs = 0.0;
            dsn = 1.0;
            ddcs = 0.0;
            ddsn = 0.0;
        } else if (b > 0.0) {
            double sb = std::sqrt(b);
            cs = std::cos(sb * s);
            sn = std::sin(sb * s) / sb;
            dcs = -sb * std::sin(sb * s);
            dsn = std::cos(sb * s);
            ddcs = -b * cs;
            ddsn = -b * sn;
        } else {
            double sb = std::sqrt(-b);
            cs = std::cosh(sb * s);
            sn = std::sinh(sb * s) / sb;
            dcs = sb * std::sinh(sb * s);
            dsn = std::cosh(sb * s);
            ddcs = -b * cs;
            ddsn = -b * sn;
        }
    };
    imm->eval = [C, E, scalars](double s, double th) {
        double cs, sn, dcs, dsn, ddcs, ddsn;
        scalars(s, cs, sn, dcs, dsn, ddcs, ddsn);
        Vec w = std::cos(th) * E.col(0) + std::sin(th) * E.col(1);
        return (cs * C + sn * w).eval();
    };
    imm->analytic_jet = [C, E, scalars](double s, double th) {
        double cs, sn, dcs, dsn, ddcs, ddsn;
        scalars(s, cs, sn, dcs, dsn, ddcs, ddsn);
        Vec w = std::cos(th) * E.col(0) + std::sin(th) * E.col(1);
        Vec wd = -std::sin(th) * E.col(0) + std::cos(th) * E.col(1);
        Jet2 J;
        J.f = cs * C + sn * w;
        J.fu = dcs * C + dsn * w;
        J.fv = sn * wd;
        J.fuu = ddcs * C + ddsn * w;
        J.fuv = dsn * wd;
        J.fvv = -sn * w;
        return J;
    };
    return imm;
}

inline std::shared_ptr<ParametricImmersion> clifford_chart(const ModelSpace& space,
                                                           const std::string& name) {
    auto imm = std::make_shared<ParametricImmersion>();
    imm->space = space;
    imm->m = 2;
    imm->name = name;
    imm->domain = ParameterDomain{0.0, 2.0 * kPi, 0.0, 2.0 * kPi, true, true};
    const double s = 1.0 / std::sqrt(2.0 * space.b);
    imm->eval = [s](double u, double v) {
        Vec f(4);
        f << std::cos(u), std::sin(u), std::cos(v), std::sin(v);
        return (s * f).eval();
    };
    imm->analytic_jet = [s](double u, double v) {
        Jet2 J;
        Vec f(4), fu(4), fv(4), fuu(4), fvv(4);
        f << std::cos(u), std::sin(u), std::cos(v), std::sin(v);
        fu << -std::sin(u), std::cos(u), 0, 0;
        fv << 0, 0, -std::sin(v), std::cos(v);
        fuu << -std::cos(u), -std::sin(u), 0, 0;
        fvv << 0, 0, -std::cos(v), -std::sin(v);
        J.f = s * f;
        J.fu = s * fu;
        J.fv = s * fv;
        J.fuu = s * fuu;
        J.fuv = Vec::Zero(4);
        J.fvv = s * fvv;
        return J;
    };
    return imm;
}

inline std::shared_ptr<ParametricImmersion> revolution_torus_chart(const ModelSpace& space,
                                                                   double R, double r,
                                                                   const std::string& name) {
    auto imm = std::make_shared<ParametricImmersion>();
    imm->space = space;
    imm->m = 2;
    imm->name = name;
    imm->domain = ParameterDomain{0.0, 2.0 * kPi, 0.0, 2.0 * kPi, true, true};
    imm->eval = [R, r](double u, double v) {
        Vec f(3);
        double w = R + r * std::cos(v);
        f << w * std::cos(u), w * std::sin(u), r * std::sin(v);
        return f;
    };
    imm->analytic_jet = [R, r](double u, double v) {
        double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
        double w = R + r * cv;
        Jet2 J;
        Vec t(3);
        t << w * cu, w * su, r * sv;
        J.f = t;
        t << -w * su, w * cu, 0;
        J.fu = t;
        t << -r * sv * cu, -r * sv * su, r * cv;
        J.fv = t;
        t << -w * cu, -w * su, 0;
        J.fuu = t;
        t << r * sv * su, -r * sv * cu, 0;
        J.fuv = t;
        t << -r * cv * cu, -r * cv * su, -r * sv;
        J.fvv = t;
        return J;
    };
    return imm;
}

inline std::shared_ptr<ParametricImmersion> circle_chart(const ModelSpace& space, double rho,
                                                         const std::string& name) {
    auto imm = std::make_shared<ParametricImmersion>();
    imm->space = space;
    imm->m = 1;
    imm->name = name;
    imm->domain.u0 = 0.0;
    imm->domain.u1 = 2.0 * kPi;
    imm->domain.periodic_u = true;
    double sb = std::sqrt(space.b);
    const double a = std::sin(sb * rho) / sb;
    const double h = std::cos(sb * rho) / sb;
    imm->eval = [a, h](double t, double) {
        Vec f(3);
        f << a * std::cos(t), a * std::sin(t), h;
        return f;
    };
    imm->analytic_jet = [a, h](double t, double) {
        Jet2 J;
        Vec f(3);
        f << a * std::cos(t), a * std::sin(t), h;
        J.f = f;
        f << -a * std::sin(t), a * std::cos(t), 0;
        J.fu = f;
        f << -a * std::cos(t), -a * std::sin(t), 0;
        J.fuu = f;
        J.fv = Vec::Zero(3);
        J.fuv = Vec::Zero(3);
        J.fvv = Vec::Zero(3);
        return J;
    };
    return imm;
}

inline Mat axes(int dim, int i0, int i1, int i2 = -1) {
    Mat E = Mat::Zero(dim, i2 >= 0 ? 3 : 2);
    E(i0, 0) = 1.0;
    E(i1, 1) = 1.0;
    if (i2 >= 0) E(i2, 2) = 1.0;
    return E;
}

} // namespace detail

/// Instantiates the immersion charts for a catalog entry.
inline std::vector<std::shared_ptr<const ParametricImmersion>>
make_immersions(const SurfaceCatalogEntry& e) {
    using detail::axes;
    std::vector<std::shared_ptr<const ParametricImmersion>> out;
    if (e.kind == "round_sphere") {
        ModelSpace space{3, 0.0};
        double R = e.param("radius");
        Vec c = Vec::Zero(3);
        if (auto it = e.params.find("center_z"); it != e.params.end()) c[2] = it->second;
        out.push_back(detail::sphere_chart(space, c, R, axes(3, 0, 1, 2), e.name));
    } else if (e.kind == "tangent_sphere_pair") {
        ModelSpace space{3, 0.0};
        double R = e.param("radius");
        Vec up = Vec::Zero(3), dn = Vec::Zero(3);
        up[2] = R;
        dn[2] = -R;
        out.push_back(detail::sphere_chart(space, up, R, axes(3, 0, 1, 2), e.name + "_upper"));
        out.push_back(detail::sphere_chart(space, dn, R, axes(3, 0, 1, 2), e.name + "_lower"));
    } else if (e.kind == "geodesic_sphere" || e.kind == "great_sphere") {
        double b = e.param("b");
        ModelSpace space{3, b};
        double rho = e.kind == "great_sphere" ? kPi / (2.0 * std::sqrt(b)) : e.param("rho");
        double sb = std::sqrt(std::abs(b));
        Vec c = Vec::Zero(4);
        double cs, sn;
        Mat E;
        if (b > 0.0) {
            c[3] = 1.0 / sb;
            cs = std::cos(sb * rho);
            sn = std::sin(sb * rho) / sb;
            E = axes(4, 0, 1, 2);
        } else {
            c[0] = 1.0 / sb;
            cs = std::cosh(sb * rho);
            sn = std::sinh(sb * rho) / sb;
            E = axes(4, 1, 2, 3);
        }
        out.push_back(detail::sphere_chart(space, (cs * c).eval(), sn, E, e.name));
    } else if (e.kind == "clifford_torus") {
        ModelSpace space{3, e.param("b")};
        out.push_back(detail::clifford_chart(space, e.name));
    } else if (e.kind == "torus_of_revolution") {
        ModelSpace space{3, 0.0};
        out.push_back(
            detail::revolution_torus_chart(space, e.param("R"), e.param("r"), e.name));
    } else if (e.kind == "flat_disk") {
        double b = e.params.count("b") ? e.params.at("b") : 0.0;
        ModelSpace space{3, b};
        double rho = e.param("rho");
        Vec c;
        Mat E;
        if (b == 0.0) {
            c = Vec::Zero(3);
            E = axes(3, 0, 1);
        } else if (b < 0.0) {
            c = Vec::Zero(4);
            c[0] = 1.0 / std::sqrt(-b);
            E = axes(4, 1, 2);
        } else {
            c = Vec::Zero(4);
            c[3] = 1.0 / std::sqrt(b);
            E = axes(4, 0, 1);
        }
        out.push_back(detail::disk_chart(space, c, rho, E, e.name));
    } else if (e.kind == "geodesic_circle") {
        ModelSpace space{2, e.param("b")};
        out.push_back(detail::circle_chart(space, e.param("rho"), e.name));
    } else {
        throw InputError("catalog: unknown kind '" + e.kind + "'");
    }
    return out;
}

/// Builds the deterministic sampled varifold for (entry, resolution):
/// resolution = cells per axis of the composite tensor Gauss rule.
inline BuiltSurface catalog_build(const SurfaceCatalogEntry& e, int resolution) {
    if (resolution < 2) throw InputError("catalog_build: resolution must be at least 2");
    QuadratureSpec spec;
    spec.cells_u = spec.cells_v = resolution;
    spec.cell_order = 3;
    spec.boundary_cells = std::max(8, resolution);
    auto imms = make_immersions(e);
    std::vector<SampledVarifold> parts;
    for (size_t i = 0; i < imms.size(); ++i)
        parts.push_back(sample_varifold(imms[i], spec, static_cast<int>(i)));
    BuiltSurface built{e, parts.size() == 1 ? std::move(parts[0]) : union_varifolds(parts),
                       Point{}, Point{}, imms};
    for (const auto& [pt, k] : e.multiplicity_points)
        built.varifold.multiplicity_hints.emplace_back(detail::stdvec(pt), k);

    const ModelSpace& S = built.varifold.space;
    const auto& I0 = *imms[0];
    if (e.kind == "tangent_sphere_pair") {
        built.basepoint = S.point(Vec::Zero(3));
        built.center = built.basepoint;
    } else if (e.kind == "flat_disk") {
        built.basepoint = S.point(I0.eval(0.0, 0.0));
        built.center = built.basepoint;
    } else if (e.kind == "round_sphere") {
        built.basepoint = S.point(I0.eval(kPi / 2, 0.0));
        built.center = S.point(I0.eval(0.0, 0.0) - Vec::Unit(3, 2) * e.param("radius"));
    } else if (e.kind == "geodesic_sphere" || e.kind == "great_sphere") {
        built.basepoint = S.point(I0.eval(kPi / 2, 0.0));
        double b = e.param("b");
        Vec c = Vec::Zero(4);
        if (b > 0.0)
            c[3] = 1.0 / std::sqrt(b);
        else
            c[0] = 1.0 / std::sqrt(-b);
        built.center = S.point(c);
    } else if (e.kind == "geodesic_circle") {
        built.basepoint = S.point(I0.eval(0.0, 0.0));
        Vec pole = Vec::Zero(3);
        pole[2] = 1.0 / std::sqrt(e.param("b"));
        built.center = S.point(pole); // axis pole: support sits at constant distance rho
    } else {
        built.basepoint = S.point(I0.eval(0.0, I0.m == 2 ? 0.0 : 0.0));
        built.center = built.basepoint;
    }
    return built;
}

// ---------------------------------------------------------------------------
// Catalog file (JSON, versioned in-repo)
// ---------------------------------------------------------------------------

inline std::vector<SurfaceCatalogEntry> parse_catalog(const nlohmann::json& doc) {
    if (!doc.contains("surfaces") || !doc["surfaces"].is_array())
        throw InputError("catalog: missing 'surfaces' array");
    std::vector<SurfaceCatalogEntry> out;
    for (const auto& js : doc["surfaces"]) {
        SurfaceCatalogEntry e;
        e.name = js.at("name").get<std::string>();
        e.kind = js.at("kind").get<std::string>();
        e.m = js.value("m", 2);
        if (js.contains("params"))
            for (auto& [k, v] : js["params"].items()) e.params[k] = v.get<double>();
        if (js.contains("known")) {
            for (auto& [k, v] : js["known"].items()) {
                KnownValue kv;
                kv.value = v.at("value").get<double>();
                kv.provenance = v.value("provenance", "");
                if (kv.provenance.empty())
                    throw InputError("catalog entry '" + e.name + "': known value '" + k +
                                     "' lacks a provenance note");
                e.known[k] = kv;
            }
        }
        e.minimal = js.value("minimal", false);
        e.closed = js.value("closed", true);
        e.connected = js.value("connected", true);
        if (js.contains("multiplicity_points")) {
            for (const auto& mp : js["multiplicity_points"]) {
                e.multiplicity_points.emplace_back(mp.at("point").get<std::vector<double>>(),
                                                   mp.at("k").get<int>());
                e.multiplicity_provenance = mp.value("provenance", "");
            }
        }
        make_immersions(e); // validates kind and parameters early
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<SurfaceCatalogEntry> load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("catalog: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& ex) {
        throw InputError("catalog: parse failure in '" + path + "': " + ex.what());
    }
    return parse_catalog(doc);
}

inline const SurfaceCatalogEntry& find_entry(const std::vector<SurfaceCatalogEntry>& entries,
                                             const std::string& name) {
    for (const auto& e : entries)
        if (e.name == name) return e;
    std::string available;
    for (const auto& e : entries) available += (available.empty() ? "" : ", ") + e.name;
    throw InputError("catalog: unknown surface '" + name + "'; available: " + available);
}

} // namespace varifolds::catalog
