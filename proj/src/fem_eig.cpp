#include "poscert/fem_eig.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <queue>

#include "poscert/verified_pd.hpp"

namespace poscert {

using namespace rounding;

std::pair<Rational, Rational> TriMesh::vertex(int k) const {
  const auto& g = grid.at(static_cast<std::size_t>(k));
  return {Rational(g[0]) * h, Rational(g[1]) * h};
}

TriMesh mesh_frame(const FrameDomain& domain, const Rational& h) {
  if (!(h > 0)) throw Error(ErrorCode::IncommensurateGeometry, "mesh size must be positive");
  const Rational inv = 1 / h;
  if (inv.get_den() != 1) throw Error(ErrorCode::IncommensurateGeometry, "1/h must be an integer");
  if (domain.a < 0 || domain.a >= Rational(1, 2)) throw Error(ErrorCode::IncommensurateGeometry, "need 0 <= a < 1/2");
  const Rational ah = domain.a / h;
  if (ah.get_den() != 1) throw Error(ErrorCode::IncommensurateGeometry, "a must be a multiple of h");
  if (!inv.get_num().fits_sint_p() || inv.get_num() > 100000) throw Error(ErrorCode::ArgumentOutOfRange, "mesh too fine");

  TriMesh m;
  m.n = static_cast<int>(inv.get_num().get_si());
  m.h = h;
  m.a = domain.a;
  const int n = m.n;
  const int A = static_cast<int>(ah.get_num().get_si());
  const bool square = domain.is_square();
  auto removed = [&](int i, int j) { return !square && i >= A && i < n - A && j >= A && j < n - A; };
  auto on_boundary = [&](int i, int j) {
    if (i == 0 || j == 0 || i == n || j == n) return true;
    return !square && i >= A && i <= n - A && j >= A && j <= n - A;
  };

  std::vector<int> id(static_cast<std::size_t>(n + 1) * (n + 1), -1);
  auto vid = [&](int i, int j) {
    int& v = id[static_cast<std::size_t>(i) * (n + 1) + j];
    if (v < 0) {
      v = static_cast<int>(m.grid.size());
      m.grid.push_back({i, j});
      m.boundary.push_back(on_boundary(i, j));
    }
    return v;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (removed(i, j)) continue;
      m.triangles.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j)});
      m.triangles.push_back({vid(i, j + 1), vid(i, j), vid(i + 1, j + 1)});
    }
  return m;
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os << "vertices " << mesh.grid.size() << "\n";
  for (std::size_t k = 0; k < mesh.grid.size(); ++k) {
    const auto [x, y] = mesh.vertex(static_cast<int>(k));
    os << to_string(x) << " " << to_string(y) << " " << (mesh.boundary[k] ? 1 : 0) << "\n";
  }
  os << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
}

std::string default_fem_table() {
  if (const char* env = std::getenv("POSCERT_CONFIG_DIR")) return std::string(env) + "/fem_constants.json";
  return std::string(POSCERT_CONFIG_DIR) + "/fem_constants.json";
}

double fem_kappa(const std::string& table_path) {
  const std::string path = table_path.empty() ? default_fem_table() : table_path;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingConstant, "cannot open FEM constant table " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!j.contains("kappa")) throw Error(ErrorCode::MissingConstant, "no kappa in " + path);
  return to_interval(parse_rational(j.at("kappa").get<std::string>())).hi();
}

double interpolation_constant(const Rational& h, const std::string& table_path) {
  return mul_up(fem_kappa(table_path), to_interval(h).hi());
}

namespace {

// Reference matrices for a right isosceles triangle, right-angle vertex first.
constexpr double kP1Stiff[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};

using SpMat = Eigen::SparseMatrix<double>;

// Approximate smallest eigenvalue of K x = lambda M x by inverse iteration,
// then shifted inverse iteration. Returns the Rayleigh quotient and vector.
std::pair<double, Eigen::VectorXd> smallest_eigenpair(const SpMat& K, const SpMat& M) {
  const Eigen::Index n = K.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  auto rq = [&](const Eigen::VectorXd& v) { return v.dot(K * v) / v.dot(M * v); };
  Eigen::SimplicialLDLT<SpMat> solver(K);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::VerificationFailure, "FEM stiffness factorization failed");
  double lam = rq(x);
  for (int it = 0; it < 30; ++it) {
    x = solver.solve(M * x);
    x /= x.norm();
    lam = rq(x);
  }
  // Shift just below the estimate to separate clustered eigenvalues.
  const SpMat S = K - 0.99 * lam * M;
  Eigen::SimplicialLDLT<SpMat> shifted(S);
  if (shifted.info() == Eigen::Success) {
    for (int it = 0; it < 40; ++it) {
      const Eigen::VectorXd y = shifted.solve(M * x);
      if (!y.allFinite()) break;
      x = y / y.norm();
      const double next = rq(x);
      const bool done = std::fabs(next - lam) <= 1e-14 * lam;
      lam = next;
      if (done) break;
    }
  }
  return {lam, x};
}

// Cuthill-McKee order from a pseudo-peripheral start; returns perm[old] = new.
std::vector<int> cuthill_mckee(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  auto bfs_last = [&](int s) {
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::queue<int> q;
    q.push(s);
    dist[static_cast<std::size_t>(s)] = 0;
    int last = s;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      last = v;
      for (int w : adj[static_cast<std::size_t>(v)])
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          q.push(w);
        }
    }
    return last;
  };
  int next = 0;
  for (int root = 0; root < n; ++root) {
    if (perm[static_cast<std::size_t>(root)] >= 0) continue;
    const int start = bfs_last(bfs_last(root));
    std::queue<int> q;
    q.push(start);
    perm[static_cast<std::size_t>(start)] = next++;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      std::vector<int> nb;
      for (int w : adj[static_cast<std::size_t>(v)])
        if (perm[static_cast<std::size_t>(w)] < 0) nb.push_back(w);
      std::sort(nb.begin(), nb.end(), [&](int a, int b) {
        return adj[static_cast<std::size_t>(a)].size() < adj[static_cast<std::size_t>(b)].size();
      });
      for (int w : nb) {
        if (perm[static_cast<std::size_t>(w)] >= 0) continue;
        perm[static_cast<std::size_t>(w)] = next++;
        q.push(w);
      }
    }
  }
  return perm;
}

}  // namespace

FemEnclosure lambda1_enclosure_fem(const TriMesh& mesh, double C_h) {
  if (!(C_h >= 0)) throw Error(ErrorCode::ArgumentOutOfRange, "C_h must be >= 0");
  FemEnclosure out;
  out.C_h = C_h;
  out.enclosure.k = 1;
  const Interval p1_mass = to_interval(mesh.area() / 12);  // times [2 1 1; 1 2 1; 1 1 2]
  const Interval cr_mass = to_interval(mesh.area() / 3);   // times I

  // ---- P1 upper bound -------------------------------------------------
  std::vector<int> dof(mesh.grid.size(), -1);
  int np = 0;
  for (std::size_t v = 0; v < mesh.grid.size(); ++v)
    if (!mesh.boundary[v]) dof[v] = np++;
  out.p1_dofs = np;
  // A frame one cell wide has no interior vertex: only the lower bound is available.
  out.enclosure.upper = kInf;
  if (np > 0) {
    std::vector<Eigen::Triplet<double>> kt, mt;
    const double mm = p1_mass.mid();
    for (const auto& t : mesh.triangles)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          const int a = dof[static_cast<std::size_t>(t[static_cast<std::size_t>(p)])];
          const int b = dof[static_cast<std::size_t>(t[static_cast<std::size_t>(q)])];
          if (a < 0 || b < 0) continue;
          kt.emplace_back(a, b, kP1Stiff[p][q]);
          mt.emplace_back(a, b, (p == q ? 2.0 : 1.0) * mm);
        }
    SpMat K(np, np), M(np, np);
    K.setFromTriplets(kt.begin(), kt.end());
    M.setFromTriplets(mt.begin(), mt.end());
    const Eigen::VectorXd x = smallest_eigenpair(K, M).second;
    // Rayleigh quotient of the P1 function with nodal values x, in interval arithmetic.
    Interval num(0.0), den(0.0);
    for (const auto& t : mesh.triangles) {
      Interval v[3];
      for (int p = 0; p < 3; ++p) {
        const int a = dof[static_cast<std::size_t>(t[static_cast<std::size_t>(p)])];
        v[p] = Interval(a < 0 ? 0.0 : x(a));
      }
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          const Interval vv = v[p] * v[q];
          num += kP1Stiff[p][q] * vv;
          den += (p == q ? 2.0 : 1.0) * vv;
        }
    }
    den *= p1_mass;
    if (!(den.lo() > 0)) throw Error(ErrorCode::VerificationFailure, "degenerate P1 trial function");
    out.enclosure.upper = (num / den).hi();
  }

  // ---- Crouzeix-Raviart lower bound ----------------------------------
  // Edge k of a triangle is the one opposite local vertex k.
  std::map<std::pair<int, int>, int> edge_id;
  std::vector<int> edge_count;
  std::vector<std::array<int, 3>> tri_edges;
  tri_edges.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    std::array<int, 3> e{};
    for (int k = 0; k < 3; ++k) {
      int a = t[static_cast<std::size_t>((k + 1) % 3)];
      int b = t[static_cast<std::size_t>((k + 2) % 3)];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_id.emplace(std::make_pair(a, b), static_cast<int>(edge_count.size()));
      if (inserted) edge_count.push_back(0);
      ++edge_count[static_cast<std::size_t>(it->second)];
      e[static_cast<std::size_t>(k)] = it->second;
    }
    tri_edges.push_back(e);
  }
  // Boundary edges belong to a single triangle; their dofs vanish.
  std::vector<int> cdof(edge_count.size(), -1);
  int nc = 0;
  for (std::size_t e = 0; e < edge_count.size(); ++e)
    if (edge_count[e] == 2) cdof[e] = nc++;
  out.cr_dofs = nc;
  if (nc == 0) throw Error(ErrorCode::VerificationFailure, "mesh has no interior edge");

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(nc));
  for (const auto& e : tri_edges)
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) {
        const int a = cdof[static_cast<std::size_t>(e[static_cast<std::size_t>(p)])];
        const int b = cdof[static_cast<std::size_t>(e[static_cast<std::size_t>(q)])];
        if (a >= 0 && b >= 0 && a != b) adj[static_cast<std::size_t>(a)].push_back(b);
      }
  for (auto& l : adj) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  const std::vector<int> perm = cuthill_mckee(adj);
  int bw = 0;
  for (int a = 0; a < nc; ++a)
    for (int b : adj[static_cast<std::size_t>(a)])
      bw = std::max(bw, std::abs(perm[static_cast<std::size_t>(a)] - perm[static_cast<std::size_t>(b)]));
  out.bandwidth = bw;

  double lam_cr = 0;
  {
    std::vector<Eigen::Triplet<double>> kt, mt;
    for (const auto& e : tri_edges)
      for (int p = 0; p < 3; ++p) {
        const int a = cdof[static_cast<std::size_t>(e[static_cast<std::size_t>(p)])];
        if (a < 0) continue;
        mt.emplace_back(a, a, cr_mass.mid());
        for (int q = 0; q < 3; ++q) {
          const int b = cdof[static_cast<std::size_t>(e[static_cast<std::size_t>(q)])];
          if (b >= 0) kt.emplace_back(a, b, 4.0 * kP1Stiff[p][q]);
        }
      }
    SpMat K(nc, nc), M(nc, nc);
    K.setFromTriplets(kt.begin(), kt.end());
    M.setFromTriplets(mt.begin(), mt.end());
    lam_cr = smallest_eigenpair(K, M).first;
  }

  // A - sigma B positive definite certifies lambda_CR,1 > sigma.
  auto certify = [&](double sigma) {
    BandMatrix C(nc, bw);
    const Interval s_mass = Interval(sigma) * cr_mass;
    for (const auto& e : tri_edges)
      for (int p = 0; p < 3; ++p) {
        const int a = cdof[static_cast<std::size_t>(e[static_cast<std::size_t>(p)])];
        if (a < 0) continue;
        const int pa = perm[static_cast<std::size_t>(a)];
        C.add(pa, pa, -s_mass);
        for (int q = p; q < 3; ++q) {
          const int b = cdof[static_cast<std::size_t>(e[static_cast<std::size_t>(q)])];
          if (b < 0) continue;
          C.add(pa, perm[static_cast<std::size_t>(b)], Interval(4.0 * kP1Stiff[p][q]));
        }
      }
    return verified_pd(C);
  };
  double sigma = 0;
  for (double rel = 1e-9; rel < 1.0; rel *= 10) {
    const double s = lam_cr * (1.0 - rel);
    if (certify(s)) {
      sigma = s;
      break;
    }
  }
  if (!(sigma > 0)) throw Error(ErrorCode::VerificationFailure, "could not certify the CR eigenvalue lower bound");
  out.lambda_cr_lower = sigma;
  out.enclosure.lower = div_down(sigma, add_up(1.0, mul_up(mul_up(C_h, C_h), sigma)));
  return out;
}

}  // namespace poscert
