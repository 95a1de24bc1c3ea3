#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace freqmix::io {

namespace fs = std::filesystem;

std::vector<unsigned char> read_file(const fs::path& path);
std::string read_text(const fs::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view bytes);
void write_file_atomic(const fs::path& path, const std::vector<unsigned char>& bytes);

std::uint32_t crc32_of(std::string_view bytes);
std::string crc32_hex(const fs::path& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Strict full-string double parse; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// A directory whose files are moved into `target` on commit() and deleted otherwise.
class StagingDir {
 public:
  explicit StagingDir(const fs::path& target);
  ~StagingDir();
  StagingDir(const StagingDir&) = delete;
  StagingDir& operator=(const StagingDir&) = delete;

  fs::path file(const std::string& name) const { return dir_ / name; }
  void commit();

 private:
  fs::path target_;
  fs::path dir_;
  bool committed_ = false;
};

}  // namespace freqmix::io
