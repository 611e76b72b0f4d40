#include "satpower/precoding.hpp"

#include <Eigen/SVD>
#include <limits>
#include <sstream>

#include "satpower/errors.hpp"

namespace satpower {

namespace {

constexpr double kMaxZfCondition = 1e12;

Eigen::MatrixXcd normalize_columns(Eigen::MatrixXcd w) {
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const double n = w.col(c).norm();
    if (n > 0) w.col(c) /= n;
  }
  return w;
}

}  // namespace

std::string to_string(PrecoderMethod m) { return m == PrecoderMethod::kZf ? "zf" : "rzf"; }

PrecoderMethod precoder_from_string(const std::string& name) {
  if (name == "zf") return PrecoderMethod::kZf;
  if (name == "rzf") return PrecoderMethod::kRzf;
  throw InvalidConfigError("unknown precoder '" + name + "' (expected zf or rzf)");
}

PrecodingMatrix zf_precoder(const ChannelMatrix& channel) {
  const Eigen::MatrixXcd& h = channel.h;
  const Eigen::MatrixXcd gram = h.adjoint() * h;

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                            : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxZfCondition)) {
    std::ostringstream msg;
    msg << "channel Gram matrix is numerically singular (condition number " << cond << ")";
    throw SingularChannelError(msg.str());
  }

  return {normalize_columns(h * gram.llt().solve(
              Eigen::MatrixXcd::Identity(h.cols(), h.cols()))),
          PrecoderMethod::kZf};
}

PrecodingMatrix rzf_precoder(const ChannelMatrix& channel, double noise_w, double max_power_w) {
  if (max_power_w <= 0) throw InvalidConfigError("max_power must be positive");
  const Eigen::MatrixXcd& h = channel.h;
  const double reg = static_cast<double>(h.cols()) * noise_w / max_power_w;
  const Eigen::MatrixXcd gram =
      h.adjoint() * h + reg * Eigen::MatrixXcd::Identity(h.cols(), h.cols());
  return {normalize_columns(h * gram.llt().solve(
              Eigen::MatrixXcd::Identity(h.cols(), h.cols()))),
          PrecoderMethod::kRzf};
}

Eigen::MatrixXd coupling_matrix(const ChannelMatrix& channel, const PrecodingMatrix& precoder) {
  if (channel.h.rows() != precoder.w.rows() || channel.h.cols() != precoder.w.cols()) {
    throw InvalidConfigError("channel and precoder dimensions disagree");
  }
  return (channel.h.adjoint() * precoder.w).cwiseAbs2();
}

}  // namespace satpower
