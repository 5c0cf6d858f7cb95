#ifndef SLOWFAST_RUNNER_HPP
#define SLOWFAST_RUNNER_HPP

// Configuration-driven front door shared by the command-line tool and the C
// API: parse a run file, dispatch to the analyses, and write machine-readable
// artifacts into an output directory.
//
// Config grammar (line oriented):
//   - blank lines and lines whose first non-space character is '#' are
//     ignored;
//   - `[section]` opens a section (letters, digits, '_', '-');
//   - `key = value` assigns within the current section; the value runs to the
//     end of the line (trimmed);
//   - keys may not repeat within a section and may not appear before the
//     first section header.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slowfast/errors.hpp"
#include "slowfast/model.hpp"

namespace slowfast {

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;       // 1-based line of the entry
  int value_col = 0;  // 1-based column where the value starts
};

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  const std::vector<ConfigEntry>& entries() const { return entries_; }
  const std::string& text() const { return text_; }
  const std::string& path() const { return path_; }
  std::uint64_t hash() const { return hash_; }

  bool has_section(const std::string& section) const;
  const ConfigEntry* find(const std::string& section,
                          const std::string& key) const;

  std::string require(const std::string& section, const std::string& key) const;
  double require_double(const std::string& section,
                        const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_long(const std::string& section, const std::string& key,
                long fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  // Whitespace- or comma-separated list of numbers.
  std::vector<double> require_list(const std::string& section,
                                   const std::string& key) const;
  std::array<double, 2> require_pair(const std::string& section,
                                     const std::string& key) const;

  // Rejects keys of `section` outside `allowed` and sections outside
  // `allowed_sections` (ConfigError pointing at the offender).
  void check_keys(const std::string& section,
                  const std::vector<std::string>& allowed) const;
  void check_sections(const std::vector<std::string>& allowed) const;

 private:
  std::vector<ConfigEntry> entries_;
  std::vector<std::pair<std::string, int>> sections_;  // name, header line
  std::string text_;
  std::string path_;
  std::uint64_t hash_ = 0;
};

// Builds the model described by the [model] section: exactly one of
// `source` (inline expression), `file` (expression file, relative paths
// resolved against the config's directory), or `builtin` (family name);
// every other key binds a parameter.
Model model_from_config(const Config& cfg);

struct RunResult {
  int exit_code = 0;     // 0 ok, 1 internal, 2 domain mismatch, 3 config/IO
  ErrorCode code = ErrorCode::ok;
  std::string message;   // failure description when exit_code != 0
};

// Executes one subcommand. Artifacts are written into out_dir (created if
// missing); each is staged as `<name>.partial` and renamed on success, so a
// surviving `.partial` file marks an interrupted or failed run.
RunResult run_command(const std::string& command,
                      const std::string& config_path,
                      const std::string& out_dir, std::uint64_t seed);

int exit_code_for(ErrorCode code);

}  // namespace slowfast

#endif
