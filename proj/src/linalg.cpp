#include "matblow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "matblow/errors.hpp"

namespace matblow {

namespace {

void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
  if (a.n() != b.n()) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" + std::to_string(a.n()) +
                            " vs " + std::to_string(b.n()) + ")");
  }
}

Matrix symmetrized(const Matrix& m) {
  Matrix s = m;
  const std::size_t n = m.n();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  const std::size_t n = a.n();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
  return std::sqrt(2.0 * s);
}

struct LuFactors {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
  double smallest_pivot = std::numeric_limits<double>::infinity();
};

// Doolittle with row partial pivoting. Stops at the first pivot whose
// magnitude is <= threshold and flags the factorization singular.
LuFactors lu_factor(const Matrix& m, double threshold) {
  const std::size_t n = m.n();
  LuFactors f{m, std::vector<std::size_t>(n), 1, false, std::numeric_limits<double>::infinity()};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  Matrix& a = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    }
    f.smallest_pivot = std::min(f.smallest_pivot, best);
    if (best == 0.0 || best < threshold) {
      f.singular = true;
      return f;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    const double inv = 1.0 / a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = a(i, k) * inv;
      a(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
    }
  }
  return f;
}

}  // namespace

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b, "mat_mul");
  const std::size_t n = a.n();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

double frobenius_norm(const Matrix& m) noexcept {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double asymmetry(const Matrix& m) noexcept {
  double s = 0.0;
  const std::size_t n = m.n();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = m(i, j) - m(j, i);
      s += 2.0 * d * d;
    }
  return std::sqrt(s);
}

bool is_symmetric(const Matrix& m, double tol) noexcept {
  return asymmetry(m) <= tol * (1.0 + frobenius_norm(m));
}

Matrix lu_solve(const Matrix& m, const Matrix& rhs) {
  require_same_dim(m, rhs, "lu_solve");
  const std::size_t n = m.n();
  const double threshold = kPivotThreshold * frobenius_norm(m);
  const LuFactors f = lu_factor(m, threshold);
  if (f.singular) {
    throw SingularMatrix("lu_solve: pivot magnitude " + std::to_string(f.smallest_pivot) +
                             " below threshold " + std::to_string(threshold),
                         f.smallest_pivot);
  }
  const Matrix& lu = f.lu;
  Matrix x(n);
  for (std::size_t col = 0; col < n; ++col) {
    // forward substitution with unit lower factor
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs(f.perm[i], col);
      for (std::size_t k = 0; k < i; ++k) s -= lu(i, k) * x(k, col);
      x(i, col) = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, col);
      for (std::size_t k = ii + 1; k < n; ++k) s -= lu(ii, k) * x(k, col);
      x(ii, col) = s / lu(ii, ii);
    }
  }
  return x;
}

double determinant(const Matrix& m) {
  const LuFactors f = lu_factor(m, 0.0);
  if (f.singular) return 0.0;
  double det = f.sign;
  for (std::size_t i = 0; i < m.n(); ++i) det *= f.lu(i, i);
  return det;
}

EigenSym eig_symmetric(const Matrix& m) {
  const double asym = asymmetry(m);
  const double fro = frobenius_norm(m);
  if (asym > kSymmetryTolerance * (1.0 + fro)) {
    throw NotSymmetric("eig_symmetric: ||m - m^T||_F = " + std::to_string(asym), asym);
  }
  const std::size_t n = m.n();
  Matrix a = symmetrized(m);
  Matrix v = Matrix::identity(n);
  const double target = 1e-12 * fro;

  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep++ == kJacobiMaxSweeps) {
      throw NoConvergence("eig_symmetric: Jacobi did not converge in " +
                          std::to_string(kJacobiMaxSweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  EigenSym out{std::vector<double>(n), Matrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

namespace {

// Householder reduction to upper Hessenberg form (similarity, in place).
void reduce_to_hessenberg(Matrix& h) {
  const std::size_t n = h.n();
  if (n < 3) return;
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += h(i, k) * h(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (h(k + 1, k) > 0.0) alpha = -alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    // H <- (I - beta v v^T) H
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h(i, j);
      s *= beta;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    // H <- H (I - beta v v^T)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      s *= beta;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

double sign_of(double magnitude, double sign_source) {
  return sign_source >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

}  // namespace

// Double-shift (Francis) QR on the Hessenberg matrix, after the EISPACK hqr
// scheme: deflate small subdiagonals, split converged 1x1 and 2x2 blocks,
// apply exceptional shifts every 10 stalled iterations.
RealSpectrum real_eigenvalues(const Matrix& m) {
  const int n = static_cast<int>(m.n());
  Matrix a = m;
  reduce_to_hessenberg(a);

  RealSpectrum out;
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  const double deflate_tol = 1e-12;
  const double eps = std::numeric_limits<double>::epsilon();
  const int max_its = 30 * n;
  int nn = n - 1;
  double shift_acc = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= deflate_tol * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        out.real_eigenvalues.push_back(x + shift_acc);
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += shift_acc;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            const double r1 = x + z;
            const double r2 = z != 0.0 ? x - w / z : r1;
            out.real_eigenvalues.push_back(r1);
            out.real_eigenvalues.push_back(r2);
          } else {
            out.complex_pairs.push_back({x + p, z});
          }
          nn -= 2;
        } else {
          if (its == max_its) {
            out.converged = false;
            std::sort(out.real_eigenvalues.begin(), out.real_eigenvalues.end(), std::greater<>());
            return out;
          }
          if (its > 0 && its % 10 == 0) {
            shift_acc += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            x = y = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int mm = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (; mm >= l; --mm) {
            z = a(mm, mm);
            r = x - z;
            double s = y - z;
            p = (r * s - w) / a(mm + 1, mm) + a(mm, mm + 1);
            q = a(mm + 1, mm + 1) - z - r - s;
            r = a(mm + 2, mm + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (mm == l) break;
            const double u = std::abs(a(mm, mm - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(mm - 1, mm - 1)) + std::abs(z) + std::abs(a(mm + 1, mm + 1)));
            if (u <= eps * v) break;
          }
          for (int i = mm + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != mm + 2) a(i, i - 3) = 0.0;
          }
          for (int k = mm; k <= nn - 1; ++k) {
            if (k != mm) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == mm) {
              if (l != mm) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              double pp = a(k, j) + q * a(k + 1, j);
              if (k + 1 != nn) {
                pp += r * a(k + 2, j);
                a(k + 2, j) -= pp * z;
              }
              a(k + 1, j) -= pp * y;
              a(k, j) -= pp * x;
            }
            const int imax = std::min(nn, k + 3);
            for (int i = l; i <= imax; ++i) {
              double pp = x * a(i, k) + y * a(i, k + 1);
              if (k + 1 != nn) {
                pp += z * a(i, k + 2);
                a(i, k + 2) -= pp * r;
              }
              a(i, k + 1) -= pp * q;
              a(i, k) -= pp;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  std::sort(out.real_eigenvalues.begin(), out.real_eigenvalues.end(), std::greater<>());
  return out;
}

RayleighMax rayleigh_max(const Matrix& m) {
  const EigenSym es = eig_symmetric(m);
  RayleighMax out{es.values.front(), es.vectors.column(0)};
  std::size_t big = 0;
  for (std::size_t i = 1; i < out.witness.size(); ++i)
    if (std::abs(out.witness[i]) > std::abs(out.witness[big])) big = i;
  if (out.witness[big] < 0.0)
    for (double& c : out.witness) c = -c;
  return out;
}

Norms norms(const Matrix& m) {
  const double fro = frobenius_norm(m);
  if (fro == 0.0) return {0.0, 0.0};
  const EigenSym es = eig_symmetric(mat_mul(m.transpose(), m));
  return {fro, std::sqrt(std::max(0.0, es.values.front()))};
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b, "commutator");
  return mat_mul(a, b) - mat_mul(b, a);
}

Matrix orthogonal_factor(const Matrix& m) {
  const std::size_t n = m.n();
  const double scale = frobenius_norm(m);
  Matrix q(n);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) v[i] = m(i, j);
    // Gram-Schmidt, applied twice for orthogonality at working precision
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += q(i, k) * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= d * q(i, k);
      }
    }
    double r = 0.0;
    for (double c : v) r += c * c;
    r = std::sqrt(r);
    if (r == 0.0 || r < kPivotThreshold * scale) {
      throw SingularMatrix("orthogonal_factor: input is rank deficient", r);
    }
    for (std::size_t i = 0; i < n; ++i) q(i, j) = v[i] / r;
  }
  return q;
}

}  // namespace matblow
