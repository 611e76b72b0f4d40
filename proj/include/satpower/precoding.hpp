#pragma once

#include <Eigen/Dense>
#include <string>

#include "satpower/scenario.hpp"

namespace satpower {

enum class PrecoderMethod { kZf, kRzf };

std::string to_string(PrecoderMethod m);
PrecoderMethod precoder_from_string(const std::string& name);

/// Unit-norm precoding vectors, one column per user.
struct PrecodingMatrix {
  Eigen::MatrixXcd w;  // N x K
  PrecoderMethod method;
};

/// Zero-forcing: W = H (H^H H)^-1, columns normalized afterwards.
/// Throws SingularChannelError when the Gram condition number exceeds 1e12.
PrecodingMatrix zf_precoder(const ChannelMatrix& channel);

/// Regularized zero-forcing: W = H (H^H H + (K sigma^2 / Pmax) I)^-1,
/// columns normalized afterwards.  Never singular for Pmax > 0.
PrecodingMatrix rzf_precoder(const ChannelMatrix& channel, double noise_w, double max_power_w);

/// Effective gains mu_kl = |h_k^H w_l|^2.  Row k: what user k receives from
/// each user's beamformed stream; the diagonal is the useful gain.
Eigen::MatrixXd coupling_matrix(const ChannelMatrix& channel, const PrecodingMatrix& precoder);

}  // namespace satpower
