#ifndef AAGAN_PCA_HPP
#define AAGAN_PCA_HPP

#include <vector>

#include "aagan/tensor.hpp"

namespace aagan {

// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenpairs come back sorted by descending eigenvalue; eigenvectors are the
// columns of `vectors`, unit norm, sign fixed so the largest-magnitude entry
// of each is positive.
struct EigenDecomposition {
    std::vector<double> values;
    Tensor vectors;
};

EigenDecomposition symmetric_eigen(const Tensor& a);

// Projects N x D points onto the top-2 principal axes of the mean-centered
// data. Needs N >= 3 points spanning at least two directions.
Tensor pca_2d(const Tensor& points);

} // namespace aagan

#endif
