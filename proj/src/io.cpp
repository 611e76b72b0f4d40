#include "satpower/io.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "satpower/errors.hpp"

namespace satpower {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  return in;
}

void expect_header(std::istream& in, const std::string& want, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != want) {
    throw IoError("unexpected header in " + path + ": got '" + line + "', want '" + want + "'");
  }
}

struct Cell4 {
  int a = 0, b = 0;
  double x = 0.0, y = 0.0;
};

std::vector<Cell4> read_rows(std::istream& in, const std::string& path, int n_values) {
  std::vector<Cell4> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    Cell4 cell;
    char comma = 0;
    ls >> cell.a >> comma >> cell.b >> comma >> cell.x;
    if (n_values == 4) ls >> comma >> cell.y;
    if (!ls) throw IoError("malformed row in " + path + ": " + line);
    rows.push_back(cell);
  }
  return rows;
}

}  // namespace

void write_channel_csv(const ChannelMatrix& channel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "n,k,magnitude,phase\n";
  char line[128];
  for (Eigen::Index n = 0; n < channel.amplitude.rows(); ++n) {
    for (Eigen::Index k = 0; k < channel.amplitude.cols(); ++k) {
      std::snprintf(line, sizeof(line), "%lld,%lld,%.17g,%.17g\n", static_cast<long long>(n),
                    static_cast<long long>(k), channel.amplitude(n, k), channel.phase_rad(k));
      out << line;
    }
  }
  if (!out) throw IoError("failed writing file: " + path);
}

ChannelMatrix read_channel_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  expect_header(in, "n,k,magnitude,phase", path);
  const std::vector<Cell4> rows = read_rows(in, path, 4);
  if (rows.empty()) throw IoError("no channel rows in " + path);

  int n_beams = 0, k_users = 0;
  for (const Cell4& r : rows) {
    if (r.a < 0 || r.b < 0) throw IoError("negative index in " + path);
    n_beams = std::max(n_beams, r.a + 1);
    k_users = std::max(k_users, r.b + 1);
  }
  if (rows.size() != static_cast<std::size_t>(n_beams) * static_cast<std::size_t>(k_users)) {
    throw IoError("channel CSV is not a complete grid: " + path);
  }

  ChannelMatrix channel;
  channel.amplitude = Eigen::MatrixXd::Constant(n_beams, k_users, -1.0);
  channel.phase_rad = Eigen::VectorXd::Zero(k_users);
  for (const Cell4& r : rows) {
    channel.amplitude(r.a, r.b) = r.x;
    channel.phase_rad(r.b) = r.y;
  }
  if ((channel.amplitude.array() < 0).any()) {
    throw IoError("channel CSV has duplicate or missing entries: " + path);
  }
  channel.h.resize(n_beams, k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const std::complex<double> rot(std::cos(channel.phase_rad(k)),
                                   std::sin(channel.phase_rad(k)));
    channel.h.col(k) = channel.amplitude.col(k) * rot;
  }
  return channel;
}

void write_layout_csv(const UserLayout& layout, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "k,n,offset_deg,slant_km\n";
  char line[128];
  for (Eigen::Index k = 0; k < layout.offset_deg.rows(); ++k) {
    for (Eigen::Index n = 0; n < layout.offset_deg.cols(); ++n) {
      std::snprintf(line, sizeof(line), "%lld,%lld,%.17g,%.17g\n", static_cast<long long>(k),
                    static_cast<long long>(n), layout.offset_deg(k, n), layout.slant_km(k));
      out << line;
    }
  }
  if (!out) throw IoError("failed writing file: " + path);
}

void write_coupling_csv(const Eigen::MatrixXd& mu, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "k,l,mu\n";
  char line[128];
  for (Eigen::Index k = 0; k < mu.rows(); ++k) {
    for (Eigen::Index l = 0; l < mu.cols(); ++l) {
      std::snprintf(line, sizeof(line), "%lld,%lld,%.17g\n", static_cast<long long>(k),
                    static_cast<long long>(l), mu(k, l));
      out << line;
    }
  }
  if (!out) throw IoError("failed writing file: " + path);
}

Eigen::MatrixXd read_coupling_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  expect_header(in, "k,l,mu", path);
  const std::vector<Cell4> rows = read_rows(in, path, 3);
  if (rows.empty()) throw IoError("no coupling rows in " + path);

  int k_users = 0;
  for (const Cell4& r : rows) {
    if (r.a < 0 || r.b < 0) throw IoError("negative index in " + path);
    k_users = std::max({k_users, r.a + 1, r.b + 1});
  }
  if (rows.size() != static_cast<std::size_t>(k_users) * static_cast<std::size_t>(k_users)) {
    throw IoError("coupling CSV is not a complete square grid: " + path);
  }
  Eigen::MatrixXd mu = Eigen::MatrixXd::Constant(k_users, k_users, -1.0);
  for (const Cell4& r : rows) mu(r.a, r.b) = r.x;
  if ((mu.array() < 0).any()) {
    throw IoError("coupling CSV has duplicate, missing, or negative entries: " + path);
  }
  return mu;
}

}  // namespace satpower
