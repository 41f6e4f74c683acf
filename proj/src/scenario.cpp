#include "encplan/scenario.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace encplan {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Layout {
  int buses = 0, hours = 0;
  int features() const { return 2 * buses * hours; }
  int series() const { return 2 * buses; }
};

Matrix vectorize(const std::vector<DailyProfile>& profiles, const Layout& lay) {
  Matrix x(static_cast<Eigen::Index>(profiles.size()), lay.features());
  for (std::size_t d = 0; d < profiles.size(); ++d) {
    const auto& p = profiles[d];
    int f = 0;
    for (const auto* part : {&p.load, &p.ren}) {
      for (int b = 0; b < lay.buses; ++b) {
        for (int t = 0; t < lay.hours; ++t) x(static_cast<Eigen::Index>(d), f++) = (*part)[b][t];
      }
    }
  }
  return x;
}

double sqdist(const Matrix& y, Eigen::Index i, const Vector& c) { return (y.row(i).transpose() - c).squaredNorm(); }

}  // namespace

ReductionResult reduce_days(const std::vector<DailyProfile>& profiles, int k, double variance_target,
                            std::uint64_t seed) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(variance_target > 0.0 && variance_target <= 1.0)) throw DomainError("variance target must be in (0, 1]");
  if (profiles.empty()) throw DomainError("no daily profiles to reduce");
  Layout lay{static_cast<int>(profiles[0].load.size()), profiles[0].hours};
  for (const auto& p : profiles) {
    if (p.hours != lay.hours || static_cast<int>(p.load.size()) != lay.buses || p.ren.size() != p.load.size())
      throw DomainError("daily profiles must share bus count and horizon");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(profiles.size());
  const Matrix raw = vectorize(profiles, lay);
  {
    std::set<std::vector<double>> distinct;
    for (Eigen::Index d = 0; d < n; ++d) {
      std::vector<double> row(raw.cols());
      for (Eigen::Index f = 0; f < raw.cols(); ++f) row[f] = raw(d, f);
      distinct.insert(std::move(row));
    }
    if (static_cast<std::size_t>(k) > distinct.size())
      throw DomainError("k = " + std::to_string(k) + " exceeds the number of distinct days (" +
                        std::to_string(distinct.size()) + ")");
  }

  // standardize each bus series over all days and hours
  Vector smean(lay.series()), sstd(lay.series());
  Matrix z = raw;
  for (int s = 0; s < lay.series(); ++s) {
    const auto block = raw.middleCols(static_cast<Eigen::Index>(s) * lay.hours, lay.hours);
    const double mu = block.mean();
    const double var = (block.array() - mu).square().sum() / static_cast<double>(block.size());
    smean[s] = mu;
    sstd[s] = var > 0.0 ? std::sqrt(var) : 1.0;
    z.middleCols(static_cast<Eigen::Index>(s) * lay.hours, lay.hours) = (block.array() - mu) / sstd[s];
  }
  const Vector fmean = z.colwise().mean().transpose();
  const Matrix xc = z.rowwise() - fmean.transpose();

  // principal axes from whichever Gram matrix is smaller
  Matrix axes;
  Vector eig;
  if (xc.cols() <= n) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(xc.transpose() * xc);
    eig = es.eigenvalues().reverse();
    axes = es.eigenvectors().rowwise().reverse();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(xc * xc.transpose());
    eig = es.eigenvalues().reverse();
    const Matrix u = es.eigenvectors().rowwise().reverse();
    axes = Matrix::Zero(xc.cols(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (eig[j] > 1e-12 * std::max(1.0, eig[0])) axes.col(j) = xc.transpose() * u.col(j) / std::sqrt(eig[j]);
    }
  }
  for (Eigen::Index j = 0; j < eig.size(); ++j) eig[j] = std::max(0.0, eig[j]);
  const double total = eig.sum();
  ReductionResult res;
  double cum = 0.0;
  for (Eigen::Index j = 0; j < eig.size(); ++j) {
    cum += eig[j];
    res.cumulative_variance.push_back(total > 0.0 ? cum / total : 1.0);
  }
  res.components = 1;
  while (res.components < static_cast<int>(res.cumulative_variance.size()) &&
         res.cumulative_variance[res.components - 1] < variance_target)
    ++res.components;
  const Matrix basis = axes.leftCols(res.components);
  const Matrix y = xc * basis;

  // k-means++ seeding
  std::mt19937_64 rng(seed);
  std::vector<Vector> centers;
  {
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.push_back(y.row(pick(rng)).transpose());
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) best = std::min(best, sqdist(y, i, c));
        d2[i] = best;
        sum += best;
      }
      Eigen::Index chosen = -1;
      if (sum > 0.0) {
        std::uniform_real_distribution<double> u(0.0, sum);
        double r = u(rng), acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (d2[i] <= 0.0) continue;
          acc += d2[i];
          chosen = i;
          if (acc >= r) break;
        }
      } else {
        // all remaining days coincide with a center in reduced space
        for (Eigen::Index i = 0; i < n && chosen < 0; ++i) chosen = i;
      }
      centers.push_back(y.row(chosen).transpose());
    }
  }

  // Lloyd iterations
  std::vector<int> assign(n, -1);
  for (int it = 0; it < 300; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = sqdist(y, i, centers[0]);
      for (int c = 1; c < k; ++c) {
        const double dd = sqdist(y, i, centers[c]);
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
    }
    std::vector<int> count(k, 0);
    std::vector<Vector> sums(k, Vector::Zero(res.components));
    for (Eigen::Index i = 0; i < n; ++i) {
      ++count[assign[i]];
      sums[assign[i]] += y.row(i).transpose();
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) {
        centers[c] = sums[c] / count[c];
        continue;
      }
      // empty cluster: move the day farthest from its center
      Eigen::Index far = 0;
      double fd = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (count[assign[i]] <= 1) continue;
        const double dd = sqdist(y, i, centers[assign[i]]);
        if (dd > fd) {
          fd = dd;
          far = i;
        }
      }
      --count[assign[far]];
      assign[far] = c;
      count[c] = 1;
      centers[c] = y.row(far).transpose();
      changed = true;
    }
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) wcss += sqdist(y, i, centers[assign[i]]);
    if (!res.wcss_trace.empty() && wcss > res.wcss_trace.back() * (1.0 + 1e-12) + 1e-12)
      throw std::logic_error("k-means: within-cluster sum of squares increased");
    res.wcss_trace.push_back(wcss);
    res.iterations = it + 1;
    if (!changed && it > 0) break;
  }

  // medoids, mapped back to full dimension
  std::vector<std::vector<int>> members(k);
  for (Eigen::Index i = 0; i < n; ++i) members[assign[i]].push_back(static_cast<int>(i));
  for (int c = 0; c < k; ++c) {
    const auto& m = members[c];
    int medoid = m.front();
    double best = std::numeric_limits<double>::infinity();
    for (int i : m) {
      double s = 0.0;
      for (int j : m) s += (y.row(i) - y.row(j)).norm();
      if (s < best) {
        best = s;
        medoid = i;
      }
    }
    const Vector back = basis * y.row(medoid).transpose() + fmean;
    RepresentativeDay rd;
    rd.medoid_day = medoid;
    rd.member_days = m;
    rd.probability = static_cast<double>(m.size()) / static_cast<double>(n);
    rd.profile.hours = lay.hours;
    rd.profile.load.assign(lay.buses, std::vector<double>(lay.hours));
    rd.profile.ren.assign(lay.buses, std::vector<double>(lay.hours));
    int f = 0;
    for (int part = 0; part < 2; ++part) {
      auto& dst = part == 0 ? rd.profile.load : rd.profile.ren;
      for (int b = 0; b < lay.buses; ++b) {
        const int s = part * lay.buses + b;
        for (int t = 0; t < lay.hours; ++t, ++f) dst[b][t] = std::max(0.0, back[f] * sstd[s] + smean[s]);
      }
    }
    res.days.push_back(std::move(rd));
  }
  std::sort(res.days.begin(), res.days.end(),
            [](const RepresentativeDay& a, const RepresentativeDay& b) { return a.member_days.front() < b.member_days.front(); });

  // make the weights sum to one exactly in floating point
  double sum = 0.0;
  for (const auto& d : res.days) sum += d.probability;
  if (sum != 1.0) {
    auto big = std::max_element(res.days.begin(), res.days.end(), [](const auto& a, const auto& b) {
      return a.member_days.size() < b.member_days.size();
    });
    for (int attempt = 0; attempt < 4 && sum != 1.0; ++attempt) {
      big->probability += 1.0 - sum;
      sum = 0.0;
      for (const auto& d : res.days) sum += d.probability;
    }
  }
  return res;
}

double max_interior_step(const DailyProfile& day) {
  double s = 0.0;
  for (int t = 0; t + 1 < day.hours; ++t) s = std::max(s, std::abs(day.net_load(t + 1) - day.net_load(t)));
  return s;
}

DailyProfile smooth_boundaries(const DailyProfile& day) {
  if (day.hours < 2) throw DomainError("smoothing needs at least two hours");
  const int last = day.hours - 1;
  const double limit = max_interior_step(day);
  const double gap0 = day.net_load(last) - day.net_load(0);
  if (std::abs(gap0) <= limit) return day;
  double dl = 0.0, dr = 0.0;
  for (std::size_t b = 0; b < day.load.size(); ++b) {
    dl += day.load[b][last] - day.load[b][0];
    dr += day.ren[b][last] - day.ren[b][0];
  }
  // gap(beta) = (1 - beta) * dl - dr; smallest beta in [0, 1] with |gap| <= limit,
  // else the beta in [0, 1] that minimizes |gap|
  double beta = 1.0;
  if (dl != 0.0) {
    const double lo = 1.0 - (dr + limit) / dl;
    const double hi = 1.0 - (dr - limit) / dl;
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    if (b < 0.0) beta = 0.0;
    else if (a > 1.0) beta = 1.0;
    else beta = std::clamp(a, 0.0, 1.0);
  }
  DailyProfile out = day;
  for (std::size_t b = 0; b < day.load.size(); ++b) {
    const double mid = 0.5 * (day.load[b][0] + day.load[b][last]);
    out.load[b][0] = (1.0 - beta) * day.load[b][0] + beta * mid;
    out.load[b][last] = (1.0 - beta) * day.load[b][last] + beta * mid;
  }
  return out;
}

std::vector<RepresentativeDay> single_day(const DailyProfile& day) {
  RepresentativeDay rd;
  rd.profile = day;
  rd.probability = 1.0;
  rd.member_days = {0};
  return {rd};
}

void write_repdays_csv(const std::vector<RepresentativeDay>& days, const std::filesystem::path& path,
                       const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "day_index,probability,member_days\n";
  char buf[64];
  for (const auto& d : days) {
    std::snprintf(buf, sizeof buf, "%.17g", d.probability);
    out << d.medoid_day + 1 << "," << buf << ",";
    for (std::size_t m = 0; m < d.member_days.size(); ++m) out << (m ? ";" : "") << d.member_days[m] + 1;
    out << "\n";
  }
}

}  // namespace encplan
