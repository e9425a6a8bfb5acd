#include "gb/types.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace gb {

double subspace_angle(const Mat& a, const Mat& b) {
    Eigen::HouseholderQR<Mat> qa(a), qb(b);
    Mat qa_thin = qa.householderQ() * Mat::Identity(a.rows(), a.cols());
    Mat qb_thin = qb.householderQ() * Mat::Identity(b.rows(), b.cols());
    Eigen::JacobiSVD<Mat> svd(qa_thin.transpose() * qb_thin);
    const double c = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
    return std::acos(c);
}

Mat null_space_basis(const Mat& rows, double tol) {
    Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol * std::max(1.0, scale)) ++rank;
    return svd.matrixV().rightCols(rows.cols() - rank);
}

}  // namespace gb
