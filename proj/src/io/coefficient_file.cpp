#include "freqmix/io/coefficient_file.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "freqmix/io/fs_util.hpp"

namespace freqmix::io {
namespace {

constexpr const char* kMagic = "freqmix-coefficients";

std::vector<std::string_view> content_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto pos = rest.find('\n');
    std::string_view line = trim(rest.substr(0, pos));
    rest = pos == std::string_view::npos ? std::string_view{} : rest.substr(pos + 1);
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

long long header_int(const std::map<std::string, std::string>& header, const std::string& key,
                     long long min_value) {
  auto it = header.find(key);
  if (it == header.end()) throw ParseError(key, "coefficient file: missing header field '" + key + "'");
  long long v = 0;
  if (!parse_int(it->second, v) || v < min_value) {
    throw ParseError(key, "coefficient file: bad value '" + it->second + "' for '" + key + "'");
  }
  return v;
}

}  // namespace

std::string format_coefficients(const CoefficientFile& file) {
  const auto& c = file.coefficients;
  std::ostringstream out;
  out << kMagic << ' ' << kCoefficientFormatVersion << '\n';
  out << "sources " << c.sources() << '\n';
  out << "bands " << c.bands() << '\n';
  out << "lambda " << format_double(file.lambda) << '\n';
  out << "height " << file.height << '\n';
  out << "width " << file.width << '\n';
  out << "data\n";
  for (Index i = 0; i < c.sources(); ++i) {
    for (Index b = 0; b < c.bands(); ++b) {
      if (b) out << ' ';
      out << format_double(c(i, b));
    }
    out << '\n';
  }
  return out.str();
}

CoefficientFile parse_coefficients(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("magic", "coefficient file is empty");
  const auto magic = tokens(lines[0]);
  if (magic.size() != 2 || magic[0] != kMagic) {
    throw ParseError("magic", "not a coefficient file (expected '" + std::string(kMagic) + " <version>')");
  }
  long long version = 0;
  if (!parse_int(magic[1], version) || version != kCoefficientFormatVersion) {
    throw ParseError("version", "unsupported coefficient file version '" + std::string(magic[1]) + "'");
  }
  std::map<std::string, std::string> header;
  std::size_t i = 1;
  for (; i < lines.size() && lines[i] != "data"; ++i) {
    const auto t = tokens(lines[i]);
    if (t.size() != 2) throw ParseError(std::string(t.empty() ? "" : t[0]), "malformed header line '" + std::string(lines[i]) + "'");
    header[std::string(t[0])] = std::string(t[1]);
  }
  if (i == lines.size()) throw ParseError("data", "coefficient file has no 'data' section");

  CoefficientFile out;
  const long long sources = header_int(header, "sources", 1);
  const long long bands = header_int(header, "bands", 1);
  out.height = static_cast<Index>(header_int(header, "height", 0));
  out.width = static_cast<Index>(header_int(header, "width", 0));
  auto lit = header.find("lambda");
  if (lit == header.end()) throw ParseError("lambda", "coefficient file: missing header field 'lambda'");
  if (!parse_double(lit->second, out.lambda)) {
    throw ParseError("lambda", "coefficient file: bad value '" + lit->second + "' for 'lambda'");
  }

  const std::size_t data_rows = lines.size() - i - 1;
  if (data_rows != static_cast<std::size_t>(sources)) {
    throw Error(ErrorKind::Schema, "coefficient file declares " + std::to_string(sources) +
                                       " sources but has " + std::to_string(data_rows) + " rows");
  }
  Eigen::MatrixXd values(sources, bands);
  for (long long r = 0; r < sources; ++r) {
    const auto t = tokens(lines[i + 1 + static_cast<std::size_t>(r)]);
    if (static_cast<long long>(t.size()) != bands) {
      throw Error(ErrorKind::Schema, "coefficient file declares " + std::to_string(bands) +
                                         " bands but row " + std::to_string(r) + " has " +
                                         std::to_string(t.size()) + " entries");
    }
    for (long long b = 0; b < bands; ++b) {
      double v = 0.0;
      if (!parse_double(t[static_cast<std::size_t>(b)], v) || !std::isfinite(v)) {
        throw ParseError("data[" + std::to_string(r) + "][" + std::to_string(b) + "]",
                         "bad coefficient '" + std::string(t[static_cast<std::size_t>(b)]) + "'");
      }
      values(r, b) = v;
    }
  }
  out.coefficients = Coefficients(std::move(values));
  return out;
}

void save_coefficients(const CoefficientFile& file, const std::filesystem::path& path) {
  write_file_atomic(path, format_coefficients(file));
}

CoefficientFile load_coefficients(const std::filesystem::path& path) {
  return parse_coefficients(read_text(path));
}

}  // namespace freqmix::io
