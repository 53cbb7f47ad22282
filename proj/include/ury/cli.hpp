#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ury/error.hpp"

namespace ury::cli {

/// Environment variable naming the default catalog directory.
inline constexpr const char* kCatalogEnv = "URY_CATALOG";

/// Artifact formats a catalog accepts.
const std::vector<std::string>& artifact_formats();

/// Parses `text` in `format` and prints it back canonically. Throws ParseError
/// or DomainError when it does not parse.
std::string canonicalize(const std::string& format, const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull);

class CatalogError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A directory of named artifacts plus a MANIFEST file listing each entry's
/// format and the tuple enumeration in force for delta-seq.
class Catalog {
 public:
  struct Entry {
    std::string name;
    std::string format;
    std::string file;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  /// Creates the directory and an empty manifest when missing.
  explicit Catalog(std::filesystem::path dir);

  /// Stores the canonical form of `text`. Throws CatalogError on a name
  /// collision, an unknown format or a bad name; parse errors propagate.
  Entry put(const std::string& name, const std::string& format, const std::string& text);
  /// Stored text, byte for byte. Throws CatalogError for unknown names.
  std::string get(const std::string& name) const;
  const Entry& entry(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<Entry>& entries() const { return entries_; }

  /// Name of the enumeration artifact used by delta-seq, or "default".
  const std::string& enumeration() const { return enumeration_; }
  void set_enumeration(const std::string& name);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  void save() const;
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
  std::string enumeration_ = "default";
};

/// One command's outcome. Field order is fixed.
struct Report {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t inputs_digest = 0;
  bool exact = true;
  nlohmann::ordered_json result = nlohmann::ordered_json::object();
  double elapsed_ms = 0;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
  static Report from_json(const nlohmann::ordered_json& j);
};

/// Runs one command line (without the program name). Writes the report to
/// `out` and diagnostics to `err`. Returns 0 on success, 1 on a domain error
/// and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ury::cli
