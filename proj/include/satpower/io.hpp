#pragma once

#include <Eigen/Dense>
#include <string>

#include "satpower/scenario.hpp"

namespace satpower {

/// Channel CSV: header n,k,magnitude,phase; one row per feed/user pair.
/// Values use 17 significant digits so round-trips are exact.
void write_channel_csv(const ChannelMatrix& channel, const std::string& path);
ChannelMatrix read_channel_csv(const std::string& path);

/// Layout CSV: header k,n,offset_deg,slant_km.
void write_layout_csv(const UserLayout& layout, const std::string& path);

/// Coupling CSV: header k,l,mu.
void write_coupling_csv(const Eigen::MatrixXd& mu, const std::string& path);
Eigen::MatrixXd read_coupling_csv(const std::string& path);

}  // namespace satpower
