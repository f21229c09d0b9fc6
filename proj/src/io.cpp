#include "netctl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "netctl/error.hpp"

namespace netctl {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string time_series_csv(const std::vector<std::string>& header,
                            const std::vector<double>& times, const Eigen::MatrixXd& values) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out += ',';
    out += header[i];
  }
  out += '\n';
  for (std::size_t k = 0; k < times.size(); ++k) {
    out += format_g17(times[k]);
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      out += ',';
      out += format_g17(values(r, static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> series_header(const std::string& prefix, Eigen::Index k) {
  std::vector<std::string> out{"t"};
  for (Eigen::Index i = 1; i <= k; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw GenerationError("cannot create directory " + path.parent_path().string());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw GenerationError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw GenerationError("cannot rename " + tmp.string() + " to " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace netctl
