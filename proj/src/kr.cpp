#include "gwdetours/kr.hpp"

#include "gwdetours/binning.hpp"
#include "gwdetours/exact_ot.hpp"

namespace gwd {

namespace {

struct Slice {
  std::vector<Eigen::Index> atoms;
  std::vector<double> mass;
};

class TriangularBuilder {
 public:
  TriangularBuilder(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double quantization, bool alternate)
      : mu_(mu), nu_(nu), delta_(quantization), alternate_(alternate),
        plan_(Matrix::Zero(mu.size(), nu.size())),
        asc_mass_(static_cast<std::size_t>(mu.dim()), 0.0),
        desc_mass_(static_cast<std::size_t>(mu.dim()), 0.0) {}

  TriangularCoupling build() {
    Slice src, dst;
    for (Eigen::Index i = 0; i < mu_.size(); ++i) {
      src.atoms.push_back(i);
      src.mass.push_back(mu_.weights()(i));
    }
    for (Eigen::Index j = 0; j < nu_.size(); ++j) {
      dst.atoms.push_back(j);
      dst.mass.push_back(nu_.weights()(j));
    }
    recurse(0, src, dst);
    std::vector<Direction> dirs;
    for (std::size_t l = 0; l < asc_mass_.size(); ++l) {
      dirs.push_back(desc_mass_[l] > asc_mass_[l] ? Direction::Descending : Direction::Ascending);
    }
    return {Coupling(plan_, mu_.weights(), nu_.weights()), std::move(dirs)};
  }

 private:
  // Groups the slice by coordinate `level` and returns the group measure.
  static std::pair<Binning, Vector> group(const Matrix& points, const Slice& s, Eigen::Index level, double delta) {
    Matrix coords(static_cast<Eigen::Index>(s.atoms.size()), 1);
    for (std::size_t r = 0; r < s.atoms.size(); ++r) coords(static_cast<Eigen::Index>(r), 0) = points(s.atoms[r], level);
    Binning bins = bin_points(coords, delta);
    Vector mass = Vector::Zero(bins.size());
    for (std::size_t r = 0; r < s.atoms.size(); ++r) mass(bins.bin_of[r]) += s.mass[r];
    return {std::move(bins), std::move(mass)};
  }

  static Slice restrict(const Slice& s, const std::vector<Eigen::Index>& members, double factor) {
    Slice out;
    for (Eigen::Index r : members) {
      out.atoms.push_back(s.atoms[static_cast<std::size_t>(r)]);
      out.mass.push_back(s.mass[static_cast<std::size_t>(r)] * factor);
    }
    return out;
  }

  void recurse(Eigen::Index level, const Slice& src, const Slice& dst) {
    auto [sbins, smass] = group(mu_.points(), src, level, delta_);
    auto [dbins, dmass] = group(nu_.points(), dst, level, delta_);
    const double total = smass.sum();
    const DiscreteMeasure a = make_discrete_measure(sbins.representatives, smass / total);
    const DiscreteMeasure b = make_discrete_measure(dbins.representatives, dmass / total);
    Matrix cell;
    Direction dir = Direction::Ascending;
    if (alternate_) {
      MonotoneChoice choice = inner_gw_1d(a, b);
      dir = choice.direction;
      cell = choice.coupling.matrix() * total;
    } else {
      cell = wasserstein_1d_coupling(a, b).matrix() * total;
    }
    (dir == Direction::Ascending ? asc_mass_ : desc_mass_)[static_cast<std::size_t>(level)] += total;

    const bool last = level + 1 == mu_.dim();
    for (Eigen::Index ga = 0; ga < cell.rows(); ++ga) {
      for (Eigen::Index gb = 0; gb < cell.cols(); ++gb) {
        const double w = cell(ga, gb);
        if (!(w > 0.0)) continue;
        const Slice s = restrict(src, sbins.members[static_cast<std::size_t>(ga)], w / smass(ga));
        const Slice d = restrict(dst, dbins.members[static_cast<std::size_t>(gb)], w / dmass(gb));
        if (last) {
          for (std::size_t r = 0; r < s.atoms.size(); ++r) {
            for (std::size_t c = 0; c < d.atoms.size(); ++c) {
              plan_(s.atoms[r], d.atoms[c]) += s.mass[r] * d.mass[c] / w;
            }
          }
        } else {
          recurse(level + 1, s, d);
        }
      }
    }
  }

  const DiscreteMeasure& mu_;
  const DiscreteMeasure& nu_;
  double delta_;
  bool alternate_;
  Matrix plan_;
  std::vector<double> asc_mass_;
  std::vector<double> desc_mass_;
};

TriangularCoupling triangular(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double quantization,
                              bool alternate) {
  if (mu.dim() != nu.dim()) throw Error(ErrorCode::DimensionMismatch, "measures differ in dimension");
  return TriangularBuilder(mu, nu, quantization, alternate).build();
}

}  // namespace

TriangularCoupling classical_kr(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double quantization) {
  return triangular(mu, nu, quantization, false);
}

TriangularCoupling alternate_kr(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double quantization) {
  return triangular(mu, nu, quantization, true);
}

}  // namespace gwd
