#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "geoflow/assembly.hpp"
#include "geoflow/mesh.hpp"
#include "geoflow/schemes.hpp"
#include "geoflow/sparse.hpp"
#include "helpers.hpp"

using geoflow::OperatorSet;
using geoflow::SchemeKind;
using geoflow::StepParams;
using geoflow::StepSolution;
using geoflow::SurfaceMesh;
using geoflow::Vec3;

namespace {

const SchemeKind kClosedSchemes[] = {
    SchemeKind::DziukMcf,  SchemeKind::BgnMcf, SchemeKind::MdrMcf,
    SchemeKind::DualMdrMcf, SchemeKind::BgnSd,  SchemeKind::DualMdrSd};
const SchemeKind kDewettingSchemes[] = {SchemeKind::MdrDewetting,
                                        SchemeKind::DualMdrDewetting,
                                        SchemeKind::BgnDewetting};
const SchemeKind kMcfSchemes[] = {SchemeKind::DziukMcf, SchemeKind::BgnMcf,
                                  SchemeKind::MdrMcf, SchemeKind::DualMdrMcf};

// Stacks the scattered solution back into the documented unknown ordering
// [v, H, lambda, kappa], dropping the eliminated vertical boundary
// components of v and lambda for dewetting schemes.
std::vector<double> stack_solution(const SurfaceMesh& m, SchemeKind kind,
                                   const StepSolution& sol) {
  const bool dew = geoflow::is_dewetting(kind);
  std::vector<double> s;
  auto push_vec = [&](const geoflow::VectorField& f) {
    for (int q = 0; q < m.n_vertices(); ++q) {
      for (int d = 0; d < 3; ++d) {
        if (dew && d == 2 && m.on_boundary()[q]) continue;
        s.push_back(f[q][d]);
      }
    }
  };
  if (!sol.v.empty()) push_vec(sol.v);
  for (double h : sol.H) s.push_back(h);
  if (!sol.lambda.empty()) push_vec(sol.lambda);
  for (double k : sol.kappa) s.push_back(k);
  return s;
}

double residual_against(const geoflow::AssembledSystem& sys,
                        const std::vector<double>& x) {
  REQUIRE(static_cast<size_t>(sys.matrix.rows()) == x.size());
  const auto ax = geoflow::spmv(sys.matrix, x);
  double r = 0.0, scale = 1.0;
  for (size_t i = 0; i < ax.size(); ++i) {
    r = std::max(r, std::abs(ax[i] - sys.rhs[i]));
    scale = std::max(scale, std::abs(sys.rhs[i]));
  }
  return r / scale;
}

double mean_normal_speed(const SurfaceMesh& m, const geoflow::VectorField& v) {
  double acc = 0.0;
  for (int q = 0; q < m.n_vertices(); ++q) {
    acc += v[q].dot(m.vertex_normals()[q].normalized());
  }
  return acc / m.n_vertices();
}

double step_area_drop(const SurfaceMesh& m, SchemeKind kind,
                      const StepParams& p) {
  const StepSolution sol = geoflow::take_step(m, kind, p);
  REQUIRE(!sol.report.singular);
  geoflow::VectorField disp(m.n_vertices());
  for (int q = 0; q < m.n_vertices(); ++q) disp[q] = p.tau * sol.v[q];
  return m.area() - geoflow::update_positions(m, disp).mesh.area();
}

}  // namespace

TEST_CASE("scheme predicates and names") {
  using geoflow::scheme_name;
  CHECK(std::string(scheme_name(SchemeKind::DziukMcf)) == "dziuk_mcf");
  CHECK(std::string(scheme_name(SchemeKind::BgnMcf)) == "bgn_mcf");
  CHECK(std::string(scheme_name(SchemeKind::MdrMcf)) == "mdr_mcf");
  CHECK(std::string(scheme_name(SchemeKind::DualMdrMcf)) == "dual_mdr_mcf");
  CHECK(std::string(scheme_name(SchemeKind::BgnSd)) == "bgn_sd");
  CHECK(std::string(scheme_name(SchemeKind::DualMdrSd)) == "dual_mdr_sd");
  CHECK(std::string(scheme_name(SchemeKind::MdrDewetting)) == "mdr_dewetting");
  CHECK(std::string(scheme_name(SchemeKind::DualMdrDewetting)) ==
        "dual_mdr_dewetting");
  CHECK(std::string(scheme_name(SchemeKind::BgnDewetting)) == "bgn_dewetting");

  for (SchemeKind k : kDewettingSchemes) CHECK(geoflow::is_dewetting(k));
  for (SchemeKind k : kClosedSchemes) CHECK(!geoflow::is_dewetting(k));
  CHECK(geoflow::is_surface_diffusion(SchemeKind::BgnSd));
  CHECK(geoflow::is_surface_diffusion(SchemeKind::DualMdrSd));
  CHECK(!geoflow::is_surface_diffusion(SchemeKind::DziukMcf));
  CHECK(!geoflow::is_surface_diffusion(SchemeKind::DualMdrMcf));
}

TEST_CASE("carried fields per scheme") {
  const SurfaceMesh sphere = testutil::perturbed_icosphere(1, 0.03, 13);
  const int n = sphere.n_vertices();
  StepParams p;
  p.tau = 1e-3;

  auto sizes = [&](SchemeKind k, const SurfaceMesh& m) {
    const StepSolution s = geoflow::take_step(m, k, p);
    return std::array<int, 4>{
        static_cast<int>(s.v.size()), static_cast<int>(s.H.size()),
        static_cast<int>(s.lambda.size()), static_cast<int>(s.kappa.size())};
  };

  CHECK(sizes(SchemeKind::DziukMcf, sphere) == std::array<int, 4>{n, 0, 0, 0});
  CHECK(sizes(SchemeKind::BgnMcf, sphere) == std::array<int, 4>{n, 0, 0, 0});
  CHECK(sizes(SchemeKind::MdrMcf, sphere) == std::array<int, 4>{n, 0, 0, n});
  CHECK(sizes(SchemeKind::DualMdrMcf, sphere) ==
        std::array<int, 4>{n, n, n, n});
  CHECK(sizes(SchemeKind::BgnSd, sphere) == std::array<int, 4>{n, n, 0, 0});
  CHECK(sizes(SchemeKind::DualMdrSd, sphere) ==
        std::array<int, 4>{n, n, n, n});

  const SurfaceMesh box = geoflow::gen_cuboid(1, 1, 1, 0.5, true);
  const int nb = box.n_vertices();
  CHECK(sizes(SchemeKind::MdrDewetting, box) ==
        std::array<int, 4>{nb, nb, 0, nb});
  CHECK(sizes(SchemeKind::DualMdrDewetting, box) ==
        std::array<int, 4>{nb, nb, nb, nb});
  CHECK(sizes(SchemeKind::BgnDewetting, box) ==
        std::array<int, 4>{nb, nb, 0, 0});
}

TEST_CASE("solutions satisfy the exposed linear systems") {
  const SurfaceMesh sphere = testutil::perturbed_icosphere(1, 0.05, 2);
  const SurfaceMesh box = geoflow::gen_cuboid(1, 1, 1, 0.5, true);
  StepParams p;
  p.tau = 2e-3;
  p.theta = 2.0943951023931953;  // 120 degrees

  for (SchemeKind k : kClosedSchemes) {
    CAPTURE(geoflow::scheme_name(k));
    const OperatorSet ops = geoflow::assemble_operators(sphere, p.form);
    const StepSolution sol = geoflow::take_step(sphere, ops, k, p);
    REQUIRE(!sol.report.singular);
    const auto sys = geoflow::build_scheme_system(sphere, ops, k, p);
    CHECK(residual_against(sys, stack_solution(sphere, k, sol)) <= 1e-8);
  }
  for (SchemeKind k : kDewettingSchemes) {
    CAPTURE(geoflow::scheme_name(k));
    const OperatorSet ops = geoflow::assemble_operators(box, p.form);
    const StepSolution sol = geoflow::take_step(box, ops, k, p);
    REQUIRE(!sol.report.singular);
    const auto sys = geoflow::build_scheme_system(box, ops, k, p);
    CHECK(residual_against(sys, stack_solution(box, k, sol)) <= 1e-8);
  }
}

TEST_CASE("corrupted operators break the clean system: the check has teeth") {
  const SurfaceMesh sphere = testutil::perturbed_icosphere(1, 0.05, 2);
  StepParams p;
  p.tau = 2e-3;
  const OperatorSet clean = geoflow::assemble_operators(sphere, p.form);
  OperatorSet bad = geoflow::assemble_operators(sphere, p.form);
  bad.lumped_normal[0] *= 1.5;

  const StepSolution sol =
      geoflow::take_step(sphere, bad, SchemeKind::DualMdrMcf, p);
  const auto sys = geoflow::build_scheme_system(sphere, clean,
                                                SchemeKind::DualMdrMcf, p);
  CHECK(residual_against(sys, stack_solution(sphere, SchemeKind::DualMdrMcf,
                                             sol)) > 1e-6);
}

TEST_CASE("unit sphere: normal speed close to -2 for every mcf scheme") {
  const SurfaceMesh sphere = geoflow::gen_icosphere(3);
  StepParams p;
  p.tau = 1e-4;
  for (SchemeKind k : kMcfSchemes) {
    CAPTURE(geoflow::scheme_name(k));
    const StepSolution sol = geoflow::take_step(sphere, k, p);
    CHECK(mean_normal_speed(sphere, sol.v) ==
          doctest::Approx(-2.0).epsilon(0.02));
  }
}

TEST_CASE("curvature unknowns on spheres of radius 1 and 2") {
  StepParams p;
  p.tau = 1e-4;
  for (double radius : {1.0, 2.0}) {
    const SurfaceMesh sphere = geoflow::gen_icosphere(3, radius);
    const double href = 2.0 / radius;

    const StepSolution dual =
        geoflow::take_step(sphere, SchemeKind::DualMdrMcf, p);
    double hmean = 0.0;
    for (double h : dual.H) hmean += h;
    hmean /= dual.H.size();
    CHECK(hmean == doctest::Approx(href).epsilon(0.02));
    // pointwise accuracy is limited by the twelve valence-5 vertices, where
    // the averaged-normal curvature is consistent but not convergent
    for (double h : dual.H) CHECK(h == doctest::Approx(href).epsilon(0.20));

    // kappa pairs the stiffness with the velocity: B kappa = A3 v. On the
    // sphere v = -H n and A3 n ~ M (2/R^2) nhat, so kappa ~ -4/R^3. The
    // constant converges slowly (valence-5 vertices); the R^-3 scaling is
    // what pins the normalization.
    const StepSolution mdr = geoflow::take_step(sphere, SchemeKind::MdrMcf, p);
    double kmean = 0.0;
    for (double kv : mdr.kappa) kmean += kv;
    kmean /= mdr.kappa.size();
    CHECK(kmean ==
          doctest::Approx(-4.0 / (radius * radius * radius)).epsilon(0.10));

    // surface diffusion H on the same sphere
    const StepSolution sd =
        geoflow::take_step(sphere, SchemeKind::DualMdrSd, p);
    double hsd = 0.0;
    for (double h : sd.H) hsd += h;
    hsd /= sd.H.size();
    CHECK(hsd == doctest::Approx(href).epsilon(0.02));
  }
}

TEST_CASE("the sphere is nearly stationary under surface diffusion") {
  const SurfaceMesh sphere = geoflow::gen_icosphere(2);
  StepParams p;
  p.tau = 1e-3;
  const double drop_mcf_dual =
      step_area_drop(sphere, SchemeKind::DualMdrMcf, p);
  const double drop_mcf_bgn = step_area_drop(sphere, SchemeKind::BgnMcf, p);
  const double drop_sd_dual = step_area_drop(sphere, SchemeKind::DualMdrSd, p);
  const double drop_sd_bgn = step_area_drop(sphere, SchemeKind::BgnSd, p);

  CHECK(drop_mcf_dual > 0.0);
  CHECK(drop_mcf_bgn > 0.0);
  // continuum rate: dA/dt = -16 pi for the unit sphere
  CHECK(drop_mcf_dual ==
        doctest::Approx(16.0 * 3.14159265358979 * p.tau).epsilon(0.10));
  CHECK(std::abs(drop_sd_dual) < 0.05 * drop_mcf_dual);
  CHECK(std::abs(drop_sd_bgn) < 0.05 * drop_mcf_bgn);
}

TEST_CASE("dual multiplier stays at discretization level") {
  // the multiplier vanishes in exact arithmetic; discretely it carries the
  // consistency residual of the constraint, orders below the O(1) velocity
  StepParams p;
  p.tau = 1e-3;
  auto lambda_inf = [&](int s) {
    const StepSolution sol = geoflow::take_step(geoflow::gen_icosphere(s),
                                                SchemeKind::DualMdrMcf, p);
    double lmax = 0.0;
    for (const Vec3& l : sol.lambda)
      lmax = std::max(lmax, l.cwiseAbs().maxCoeff());
    return lmax;
  };
  // s=1 keeps full icosahedral symmetry: vertex normals are exactly radial
  // and the constraint is exactly consistent, so lambda is pure roundoff
  CHECK(lambda_inf(1) <= 1e-10);
  const double l2 = lambda_inf(2), l3 = lambda_inf(3);
  CHECK(l2 <= 1e-3);
  CHECK(l3 < l2);
}

TEST_CASE("one step shrinks a rough sphere under every mcf scheme") {
  const SurfaceMesh rough = testutil::perturbed_icosphere(2, 0.08, 31);
  StepParams p;
  p.tau = 2e-3;
  for (SchemeKind k : kMcfSchemes) {
    CAPTURE(geoflow::scheme_name(k));
    CHECK(step_area_drop(rough, k, p) > 0.0);
  }
}

TEST_CASE("dewetting: vertical boundary velocity eliminated exactly") {
  const SurfaceMesh box = geoflow::gen_cuboid(1, 2, 1, 0.34, true);
  StepParams p;
  p.tau = 1e-3;
  p.theta = 1.0471975511965976;  // 60 degrees
  for (SchemeKind k : kDewettingSchemes) {
    CAPTURE(geoflow::scheme_name(k));
    const StepSolution sol = geoflow::take_step(box, k, p);
    REQUIRE(!sol.report.singular);
    bool interior_moves = false;
    for (int q = 0; q < box.n_vertices(); ++q) {
      if (box.on_boundary()[q]) {
        CHECK(sol.v[q].z() == 0.0);
        if (!sol.lambda.empty()) CHECK(sol.lambda[q].z() == 0.0);
      } else if (std::abs(sol.v[q].z()) > 1e-12) {
        interior_moves = true;
      }
    }
    CHECK(interior_moves);
  }
}

TEST_CASE("dewetting schemes refuse closed surfaces") {
  const SurfaceMesh sphere = geoflow::gen_icosphere(1);
  StepParams p;
  for (SchemeKind k : kDewettingSchemes) {
    CHECK_THROWS_AS(geoflow::take_step(sphere, k, p),
                    geoflow::AdmissibilityError);
  }
}

TEST_CASE("operator-reusing overload is bitwise identical") {
  const SurfaceMesh sphere = testutil::perturbed_icosphere(1, 0.04, 8);
  StepParams p;
  p.tau = 1e-3;
  const OperatorSet ops = geoflow::assemble_operators(sphere, p.form);
  for (SchemeKind k : kClosedSchemes) {
    const StepSolution a = geoflow::take_step(sphere, k, p);
    const StepSolution b = geoflow::take_step(sphere, ops, k, p);
    REQUIRE(a.v.size() == b.v.size());
    for (size_t q = 0; q < a.v.size(); ++q) {
      CHECK(a.v[q].x() == b.v[q].x());
      CHECK(a.v[q].y() == b.v[q].y());
      CHECK(a.v[q].z() == b.v[q].z());
    }
  }
}
