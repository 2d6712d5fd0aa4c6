#include "fwm/noise.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "fwm/errors.hpp"

namespace fwm {

void QWienerSpec::validate() const {
  if (m < 1) throw ArgumentError("noise needs m >= 1 modes");
  if (K < 1) throw ArgumentError("time grid needs K >= 1 steps");
  if (!(T > 0.0)) throw ArgumentError("horizon T must be positive");
  if (mode_scales.size() != 0 && mode_scales.size() != m) throw ArgumentError("mode_scales needs m entries");
}

Vec QWienerSpec::grid() const {
  Vec g(K + 1);
  for (int k = 0; k <= K; ++k) g[k] = T * k / K;
  return g;
}

ControlPath ControlPath::zeros(double T, int K, int m) {
  QWienerSpec spec{m, {}, T, K};
  spec.validate();
  return ControlPath{spec.grid(), Mat::Zero(K, m)};
}

ControlPath ControlPath::constant(double T, int K, const Vec& value) {
  ControlPath h = zeros(T, K, static_cast<int>(value.size()));
  h.hdot.rowwise() = value.transpose();
  return h;
}

std::mt19937_64 replica_rng(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

BrownianPath sample_brownian(const QWienerSpec& spec, std::mt19937_64& rng, std::uint64_t seed_tag) {
  spec.validate();
  BrownianPath path;
  path.grid = spec.grid();
  path.seed = seed_tag;
  path.increments.resize(spec.K, spec.m);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(spec.dt());
  for (int k = 0; k < spec.K; ++k) {
    for (int j = 0; j < spec.m; ++j) {
      const double scale = spec.mode_scales.size() == 0 ? 1.0 : spec.mode_scales[j];
      path.increments(k, j) = scale * sd * normal(rng);
    }
  }
  return path;
}

BrownianPath sample_brownian(const QWienerSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng = replica_rng(seed, 0);
  return sample_brownian(spec, rng, seed);
}

BrownianPath coarsen(const BrownianPath& fine) {
  const int K = fine.steps();
  if (K % 2 != 0) throw ArgumentError("coarsen needs an even number of steps");
  BrownianPath coarse;
  coarse.seed = fine.seed;
  coarse.grid.resize(K / 2 + 1);
  coarse.increments.resize(K / 2, fine.modes());
  for (int k = 0; k <= K / 2; ++k) coarse.grid[k] = fine.grid[2 * k];
  for (int k = 0; k < K / 2; ++k) coarse.increments.row(k) = fine.increments.row(2 * k) + fine.increments.row(2 * k + 1);
  return coarse;
}

double cm_norm_sq(const ControlPath& h) {
  double s = 0.0;
  for (int k = 0; k < h.steps(); ++k) s += h.hdot.row(k).squaredNorm() * h.dt(k);
  return s;
}

ControlPath project_ball(const ControlPath& h, double N) {
  if (!(N > 0.0)) throw ArgumentError("ball radius N must be positive");
  const double n2 = cm_norm_sq(h);
  if (n2 <= N) return h;
  ControlPath out = h;
  out.hdot *= std::sqrt(N / n2);
  return out;
}

void write_control_csv(std::ostream& os, const ControlPath& h, int precision) {
  os << "t";
  for (int j = 0; j < h.modes(); ++j) os << ",hdot_" << (j + 1);
  os << "\n";
  char buf[64];
  for (int k = 0; k <= h.steps(); ++k) {
    const int row = std::min(k, h.steps() - 1);
    std::snprintf(buf, sizeof buf, "%.*g", precision, h.grid[k]);
    os << buf;
    for (int j = 0; j < h.modes(); ++j) {
      std::snprintf(buf, sizeof buf, "%.*g", precision, h.hdot(row, j));
      os << "," << buf;
    }
    os << "\n";
  }
}

ControlPath read_control_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ArgumentError("control CSV is empty");
  int m = 0;
  {
    std::stringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');
    if (cell != "t") throw ArgumentError("control CSV header must start with 't'");
    while (std::getline(header, cell, ',')) {
      if (cell != "hdot_" + std::to_string(m + 1)) throw ArgumentError("unexpected control CSV column '" + cell + "'");
      ++m;
    }
  }
  if (m < 1) throw ArgumentError("control CSV has no hdot columns");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ArgumentError("control CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != m + 1) {
      throw ArgumentError("control CSV line " + std::to_string(lineno) + ": expected " + std::to_string(m + 1) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ArgumentError("control CSV needs at least two rows");
  const int K = static_cast<int>(rows.size()) - 1;
  ControlPath h{Vec(K + 1), Mat(K, m)};
  for (int k = 0; k <= K; ++k) {
    h.grid[k] = rows[k][0];
    if (k > 0 && !(h.grid[k] > h.grid[k - 1])) throw ArgumentError("control CSV times must increase");
    if (k < K) {
      for (int j = 0; j < m; ++j) h.hdot(k, j) = rows[k][j + 1];
    }
  }
  if (!h.hdot.allFinite()) throw ArgumentError("control CSV contains non-finite values");
  return h;
}

}  // namespace fwm
