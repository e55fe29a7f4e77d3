#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "freqconv/lindblad.hpp"

namespace freqconv::app {

/// Headline metrics and emitted files of one command.
class RunReport {
 public:
  explicit RunReport(std::string command) : command_(std::move(command)) {}

  const std::string& command() const { return command_; }

  void add(const std::string& key, double value);
  void add(const std::string& key, const std::string& value);
  void add_flag(const std::string& key, bool value) { add(key, value ? "true" : "false"); }
  /// Records which CSV column a metric was reduced from.
  void trace(const std::string& metric, const std::string& file, const std::string& column,
             const std::string& reduction);
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  void add_file(std::filesystem::path path) { files_.push_back(std::move(path)); }
  void set_converged(bool converged) { converged_ = converged; }

  bool has(const std::string& key) const;
  /// Numeric value of a metric; throws std::out_of_range if absent.
  double value(const std::string& key) const;
  const std::string& text(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<std::filesystem::path>& files() const { return files_; }
  bool converged() const { return converged_; }

  /// `key = value` lines, warnings as `warning = ...`.
  std::string summary() const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::string> warnings_;
  std::vector<std::filesystem::path> files_;
  bool converged_ = true;
};

/// Fixed-format number used in every emitted file.
std::string format_number(double value);

/// CSV with columns t_s, n_target, n_aux, re_a, im_a, trace and, when
/// `sem` is given, sem_n_target. LF line endings.
void write_series_csv(const std::filesystem::path& path, const ObservableSeries& series,
                      const std::vector<double>* sem = nullptr);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace freqconv::app
