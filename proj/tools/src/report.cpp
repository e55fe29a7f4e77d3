#include "freqconv/app/report.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace freqconv::app {

std::string format_number(double value) { return fmt::format("{:.10e}", value); }

void RunReport::add(const std::string& key, double value) {
  entries_.emplace_back(key, fmt::format("{:.12g}", value));
}

void RunReport::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void RunReport::trace(const std::string& metric, const std::string& file,
                      const std::string& column, const std::string& reduction) {
  entries_.emplace_back(metric + ".source", file + ":" + column + " (" + reduction + ")");
}

bool RunReport::has(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& RunReport::text(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw std::out_of_range("report has no metric '" + key + "'");
}

double RunReport::value(const std::string& key) const { return std::stod(text(key)); }

std::string RunReport::summary() const {
  std::string out = "command = " + command_ + "\n";
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  out += std::string("converged = ") + (converged_ ? "true" : "false") + "\n";
  for (const auto& w : warnings_) out += "warning = " + w + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_series_csv(const std::filesystem::path& path, const ObservableSeries& s,
                      const std::vector<double>* sem) {
  std::string text = "t_s,n_target,n_aux,re_a,im_a,trace";
  if (sem != nullptr) text += ",sem_n_target";
  text += '\n';
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    text += fmt::format("{},{},{},{},{},{}", format_number(s.times[i]),
                        format_number(s.n_target[i]), format_number(s.n_aux[i]),
                        format_number(s.a[i].real()), format_number(s.a[i].imag()),
                        format_number(s.trace[i]));
    if (sem != nullptr) text += "," + format_number((*sem)[i]);
    text += '\n';
  }
  write_text(path, text);
}

}  // namespace freqconv::app
