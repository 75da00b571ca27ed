#include "regvb/matrix.hpp"

namespace regvb {

Matrix normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double s = 0.0;
    for (double v : row) s += v;
    if (!(s > 0.0)) throw std::domain_error("normalize_rows: row " + std::to_string(r) + " has no mass");
    for (double& v : row) v /= s;
  }
  return out;
}

}  // namespace regvb
