#pragma once

// Realizes a prescribed rooted tree as the nesting end of a perturbed
// checkerboard phi(x) = sin(pi x) sin(pi y) + eps * psi(x), where psi is a
// combination of plane waves of the same wavenumber sqrt(2) pi.
//
// Lattice geometry. The positive squares [i,i+1]x[j,j+1] (i + j even) form a
// rotated square lattice L+ with vertex (u,v) at square (u - v, u + v). The
// bond (u,v)-(u+1,v) meets the corner (i+1, j+1) and the bond (u,v)-(u,v+1)
// meets the corner (i, j+1). An open bond (eta = +1 at its corner) joins the
// two positive squares through the corner; a closed bond (eta = -1) joins the
// two negative ones. Positive domains are then the clusters of open bonds and
// negative domains the dual clusters.
//
// Layouts are dense rectangles of L+ vertices:
//   leaf        a single vertex (a positive island)
//   hole(X)     a ring of open bonds around X (one positive annulus whose
//               inside is a negative domain containing X)
//   side(A, B)  A and B next to each other, shorter one padded upward with
//               vertical sticks; optionally joined by one bottom-row bond
// A pattern is a forest whose roots share one sign. Engulfing a positive
// forest wraps it in a ring; engulfing a negative forest promotes the rings
// around its roots, already joined into one positive domain, to the new root.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nodal/field_sampler.hpp"
#include "nodal/nodal_topology.hpp"

namespace nodal {

using LatticePoint = std::array<int, 2>;

struct Layout {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> open_right;  // bond (x,y)-(x+1,y), index y * width + x
  std::vector<std::uint8_t> open_up;     // bond (x,y)-(x,y+1)

  bool right(int x, int y) const { return open_right[static_cast<std::size_t>(y * width + x)] != 0; }
  bool up(int x, int y) const { return open_up[static_cast<std::size_t>(y * width + x)] != 0; }
};

struct LatticeSignPattern {
  std::vector<LatticePoint> points;  // K, sorted
  std::vector<int> eta;              // +1 / -1 per point
  LatticePoint bbox_min{0, 0};
  LatticePoint bbox_max{0, 0};
  int root_sign = 1;                    // sign shared by the root domains
  std::vector<std::string> root_codes;  // canonical code of each root's tree
  Layout layout;

  std::size_t size() const { return points.size(); }
  /// Square inside the root domain (single-root patterns).
  LatticePoint root_square() const;
};

LatticeSignPattern trivial_pattern();
/// Path with k vertices. Requires k >= 1.
LatticeSignPattern grow_chain(int k);
LatticeSignPattern engulf(const LatticeSignPattern& pattern);
/// Side-by-side placement; a figure whose root sign differs from the first is
/// re-laid in the first figure's sign.
LatticeSignPattern join(const LatticeSignPattern& a, const LatticeSignPattern& b);
/// Leaf -> trivial pattern; node -> engulf(join of the children's patterns).
LatticeSignPattern pattern_for_tree(const std::string& code);
/// Direct layout of a tree with a root of the given sign.
LatticeSignPattern layout_tree(const std::string& code, int root_sign);

inline constexpr double kCheckerboardWavenumber = 1.4142135623730951 * 3.141592653589793;

double checkerboard(Vec2 x);

struct MonochromaticFit {
  double wavenumber = kCheckerboardWavenumber;
  std::vector<double> directions;  // angles theta_w
  std::vector<double> amplitudes;  // a_w
  std::vector<double> phases;      // b_w: psi = sum a_w cos(k0 <x, theta_w> + b_w)
  double residual = 0.0;           // max |psi(k) - eta(k)| (exact fit)
  double margin = 0.0;             // min eta(k) psi(k)
  double norm = 0.0;               // Euclidean norm of the cos/sin coefficients
  double condition_number = 0.0;   // exact fit only

  double evaluate(Vec2 x) const;
  PlaneWaveSet as_waves() const;
};

struct FitOptions {
  int direction_factor = 4;    // initial directions per point
  int max_direction_factor = 64;
  double tolerance = 1e-6;
};

/// Minimal-norm exact interpolation psi(k) = eta(k). The dictionary doubles
/// until the residual is below tolerance; past the cap a NumericalError
/// carries the residual and condition number.
MonochromaticFit fit_monochromatic(const LatticeSignPattern& pattern, const FitOptions& options = {});

/// Minimal-norm psi subject to eta(k) psi(k) >= 1 on K.
MonochromaticFit fit_sign_margin(const LatticeSignPattern& pattern, int direction_factor = 4);

struct RealizationStep {
  double epsilon = 0.0;
  std::string code;
  bool match = false;
  bool signs_ok = false;  // sign(phi + eps psi) = eta on K
  std::string error;
};

/// 0.2, 0.1, ... halving `steps` times.
std::vector<double> dyadic_epsilons(double start = 0.2, int steps = 10);

struct RealizeOptions {
  std::vector<double> epsilons = dyadic_epsilons();
  double spacing = 1.0 / 16.0;
  double margin = 2.0;
  std::string dump_dir;  // PGM sign images of failed steps when set
};

struct Realization {
  std::string target;
  bool matched = false;
  double epsilon = 0.0;  // first matching epsilon
  std::vector<RealizationStep> sweep;
  FieldGrid grid;        // phi + eps psi at the first match, else at the last epsilon
  MonochromaticFit fit;
  LatticeSignPattern pattern;
};

/// Builds pattern_for_tree(code), fits psi and checks each epsilon.
Realization realize_and_verify(const std::string& code, const RealizeOptions& options = {});
Realization realize_pattern(const LatticeSignPattern& pattern, const std::string& target,
                            const RealizeOptions& options = {});

/// All rooted trees with exactly n vertices, as sorted canonical codes.
std::vector<std::string> all_rooted_trees(int n);

}  // namespace nodal
