#pragma once

// Two-sided bounds for the first Dirichlet eigenvalue of the frame
// (0,1)^2 \ [a, 1-a]^2 on uniform right-triangle meshes:
//   upper: Rayleigh quotient of a conforming P1 function;
//   lower: lambda_CR / (1 + C_h^2 lambda_CR) with a certified lower bound of
//          the first Crouzeix-Raviart eigenvalue and the interpolation
//          constant C_h of the nonconforming space.

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "poscert/eigen.hpp"
#include "poscert/rational.hpp"

namespace poscert {

/// a = 0 denotes the full unit square.
struct FrameDomain {
  Rational a = 0;
  [[nodiscard]] bool is_square() const { return a == 0; }
};

struct TriMesh {
  int n = 0;  // cells per side of the background grid, h = 1/n
  Rational h;
  Rational a;
  std::vector<std::array<int, 2>> grid;       // vertex (i, j) sits at (i h, j h)
  std::vector<std::array<int, 3>> triangles;  // right-angle vertex first
  std::vector<bool> boundary;                 // vertex on the Dirichlet boundary

  [[nodiscard]] std::pair<Rational, Rational> vertex(int k) const;
  [[nodiscard]] Rational area() const { return h * h / 2; }
};

/// Uniform mesh: each background cell outside the removed square is cut
/// along its diagonal. Throws IncommensurateGeometry unless 1/h and a/h are
/// integers and 0 <= a < 1/2.
TriMesh mesh_frame(const FrameDomain& domain, const Rational& h);

/// Plain-text listing: "vertices n", "x y b" lines, "triangles m", "i j k" lines.
void write_mesh(std::ostream& os, const TriMesh& mesh);

/// kappa with ||u - Pi_CR u||_T <= kappa h ||grad(u - Pi_CR u)||_T on every
/// right isosceles triangle with legs h. Read from the config table.
double fem_kappa(const std::string& table_path = "");
std::string default_fem_table();
/// kappa h rounded up.
double interpolation_constant(const Rational& h, const std::string& table_path = "");

struct FemEnclosure {
  EigEnclosure enclosure;    // k = 1
  double lambda_cr_lower = 0;  // certified lower bound of the discrete CR eigenvalue
  double C_h = 0;
  int p1_dofs = 0;
  int cr_dofs = 0;
  int bandwidth = 0;  // of the CR matrices after reordering
};

FemEnclosure lambda1_enclosure_fem(const TriMesh& mesh, double C_h);

}  // namespace poscert
