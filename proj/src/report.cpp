#include "report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common.hpp"

namespace rwre {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string digest_hex(EVP_MD_CTX* ctx) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  return digest_hex(ctx);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Internal, "cannot open " + path.string(), "report");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
  }
  return digest_hex(ctx);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Internal, "cannot write " + path.string(), "report");
  out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Internal, "cannot read " + path.string(), "report");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string canonical_json(const nlohmann::json& j) { return j.dump(); }

CsvWriter::CsvWriter(std::vector<std::string> columns) : width_(columns.size()) {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) {
    throw Error(ErrorKind::Internal, "csv row width mismatch", "report");
  }
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

std::string decay_plot_svg(const std::string& title, const std::string& x_label,
                           const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& y_lo, const std::vector<double>& y_hi,
                           double fitted_rate) {
  const int width = 560, height = 420;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  double xmax = 1e-9, ymax = 1e-9;
  for (double v : x) xmax = std::max(xmax, v);
  for (double v : y_hi) {
    if (std::isfinite(v)) ymax = std::max(ymax, v);
  }
  ymax = std::max(ymax, fitted_rate * xmax);
  ymax *= 1.08;
  xmax *= 1.05;
  auto px = [&](double v) { return ml + v / xmax * (width - ml - mr); };
  auto py = [&](double v) { return height - mb - v / ymax * (height - mt - mb); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
    << "</text>\n";
  // axes
  s << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
    << height - mb << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  s << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
    << (mt + height - mb) / 2 << ")\">-log p</text>\n";
  // tick labels at the extremes
  s << "<text x=\"" << px(0) << "\" y=\"" << height - mb + 16
    << "\" text-anchor=\"middle\" font-size=\"10\">0</text>\n";
  s << "<text x=\"" << px(xmax / 1.05) << "\" y=\"" << height - mb + 16
    << "\" text-anchor=\"middle\" font-size=\"10\">" << format_double(xmax / 1.05) << "</text>\n";
  s << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymax / 1.08) + 4
    << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(ymax / 1.08) << "</text>\n";
  // fitted line through the origin
  s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmax / 1.05) << "\" y2=\""
    << py(fitted_rate * xmax / 1.05) << "\" stroke=\"#1f77b4\" stroke-dasharray=\"6,3\"/>\n";
  // whiskers and points
  for (size_t i = 0; i < x.size(); ++i) {
    const double lo = std::isfinite(y_lo[i]) ? y_lo[i] : 0;
    const double hi = std::isfinite(y_hi[i]) ? y_hi[i] : ymax;
    s << "<line x1=\"" << px(x[i]) << "\" y1=\"" << py(lo) << "\" x2=\"" << px(x[i]) << "\" y2=\""
      << py(hi) << "\" stroke=\"#d62728\"/>\n";
    s << "<line x1=\"" << px(x[i]) - 4 << "\" y1=\"" << py(lo) << "\" x2=\"" << px(x[i]) + 4
      << "\" y2=\"" << py(lo) << "\" stroke=\"#d62728\"/>\n";
    s << "<line x1=\"" << px(x[i]) - 4 << "\" y1=\"" << py(hi) << "\" x2=\"" << px(x[i]) + 4
      << "\" y2=\"" << py(hi) << "\" stroke=\"#d62728\"/>\n";
    s << "<circle cx=\"" << px(x[i]) << "\" cy=\"" << py(y[i]) << "\" r=\"3\" fill=\"black\"/>\n";
  }
  s << "<text x=\"" << width - mr << "\" y=\"" << mt - 6
    << "\" text-anchor=\"end\" font-size=\"11\">rate " << format_double(fitted_rate)
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace rwre
