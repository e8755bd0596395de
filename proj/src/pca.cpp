#include "aagan/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aagan/errors.hpp"

namespace aagan {

EigenDecomposition symmetric_eigen(const Tensor& a) {
    const std::size_t n = a.rows();
    if (a.rank() != 2 || a.cols() != n)
        throw ShapeError("symmetric_eigen: expects a square matrix, got " + a.shape_str());

    Tensor work = a;
    Tensor vecs({n, n});
    for (std::size_t i = 0; i < n; ++i) vecs.at(i, i) = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += work.at(p, q) * work.at(p, q);
        if (off <= 1e-30) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = work.at(p, q);
                if (apq == 0.0) continue;
                const double app = work.at(p, p), aqq = work.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double wkp = work.at(k, p), wkq = work.at(k, q);
                    work.at(k, p) = c * wkp - s * wkq;
                    work.at(k, q) = s * wkp + c * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double wpk = work.at(p, k), wqk = work.at(q, k);
                    work.at(p, k) = c * wpk - s * wqk;
                    work.at(q, k) = s * wpk + c * wqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vecs.at(k, p), vkq = vecs.at(k, q);
                    vecs.at(k, p) = c * vkp - s * vkq;
                    vecs.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return work.at(i, i) > work.at(j, j);
    });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Tensor({n, n});
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.values[j] = work.at(src, src);

        std::size_t peak = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(vecs.at(i, src)) > std::abs(vecs.at(peak, src))) peak = i;
        const double sign = vecs.at(peak, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors.at(i, j) = sign * vecs.at(i, src);
    }
    return out;
}

Tensor pca_2d(const Tensor& points) {
    const std::size_t n = points.rows(), d = points.cols();
    if (points.rank() != 2 || n < 3)
        throw ShapeError("pca_2d: needs an N x D matrix with N >= 3, got " + points.shape_str());
    if (d < 2) throw ShapeError("pca_2d: needs at least 2 feature dimensions, got " +
                                points.shape_str());

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += points.at(i, j);
    for (double& v : mean) v /= static_cast<double>(n);

    Tensor centered = points;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) centered.at(i, j) -= mean[j];

    Tensor cov({d, d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < d; ++p) {
            const double cip = centered.at(i, p);
            if (cip == 0.0) continue;
            for (std::size_t q = p; q < d; ++q) cov.at(p, q) += cip * centered.at(i, q);
        }
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p; q < d; ++q) {
            cov.at(p, q) /= static_cast<double>(n - 1);
            cov.at(q, p) = cov.at(p, q);
        }

    const EigenDecomposition eig = symmetric_eigen(cov);
    if (!(eig.values[0] > 0.0) || eig.values[1] <= eig.values[0] * 1e-12)
        throw DegenerateError("pca_2d: centered data spans fewer than 2 directions");

    Tensor out({n, 2});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < d; ++p) acc += centered.at(i, p) * eig.vectors.at(p, j);
            out.at(i, j) = acc;
        }
    return out;
}

} // namespace aagan
