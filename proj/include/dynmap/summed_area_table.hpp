#pragma once

#include <Eigen/Core>
#include <algorithm>

namespace dynmap {

// Integral image over a row-major raster. Entry (r+1, c+1) holds the sum of
// all values with row <= r and col <= c; row 0 and col 0 are zero padding.
template <typename Scalar>
class SummedAreaTable {
 public:
  using Table = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SummedAreaTable() = default;

  template <typename Derived>
  explicit SummedAreaTable(const Eigen::MatrixBase<Derived>& values)
      : table_(Table::Zero(values.rows() + 1, values.cols() + 1)) {
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      Scalar row_sum = 0;
      for (Eigen::Index c = 0; c < values.cols(); ++c) {
        row_sum += static_cast<Scalar>(values(r, c));
        table_(r + 1, c + 1) = table_(r, c + 1) + row_sum;
      }
    }
  }

  Eigen::Index rows() const { return table_.rows() - 1; }
  Eigen::Index cols() const { return table_.cols() - 1; }

  // Inclusive rectangle sum; the rectangle is clipped to the raster.
  Scalar sum(Eigen::Index row0, Eigen::Index col0, Eigen::Index row1, Eigen::Index col1) const {
    row0 = std::max<Eigen::Index>(row0, 0);
    col0 = std::max<Eigen::Index>(col0, 0);
    row1 = std::min<Eigen::Index>(row1, rows() - 1);
    col1 = std::min<Eigen::Index>(col1, cols() - 1);
    if (row0 > row1 || col0 > col1) return Scalar(0);
    return table_(row1 + 1, col1 + 1) - table_(row0, col1 + 1) - table_(row1 + 1, col0) +
           table_(row0, col0);
  }

  // Sum over the (2r+1)x(2r+1) square centred on (row, col), clipped.
  Scalar window_sum(Eigen::Index row, Eigen::Index col, Eigen::Index r) const {
    return sum(row - r, col - r, row + r, col + r);
  }

 private:
  Table table_;
};

}  // namespace dynmap
