#include "dwmpc/matrix_exp.hpp"

#include <cmath>

namespace dwmpc {

Mat3 matrix_exp(const Mat3& a) {
  // Scale so the L1 norm is below 0.5, apply the [6/6] Pade approximant,
  // then undo the scaling by repeated squaring.
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  Mat3 as = a;
  if (norm > 0.5) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
    as = a / std::ldexp(1.0, squarings);
  }

  static const double c[7] = {1.0,        1.0 / 2.0,    5.0 / 44.0, 1.0 / 66.0,
                              1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const Mat3 a2 = as * as;
  const Mat3 a4 = a2 * a2;
  const Mat3 a6 = a4 * a2;
  const Mat3 even = c[0] * Mat3::Identity() + c[2] * a2 + c[4] * a4 + c[6] * a6;
  const Mat3 odd = as * (c[1] * Mat3::Identity() + c[3] * a2 + c[5] * a4);

  Mat3 e = (even - odd).lu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

}  // namespace dwmpc
