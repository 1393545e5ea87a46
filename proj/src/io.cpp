#include "etpa/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace etpa {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

void append_meta(std::ostringstream& out, const MetaList& meta) {
  for (const auto& [key, value] : meta) out << "# " << key << "=" << value << "\n";
}

}  // namespace

std::string trace_csv(const DelayTrace& trace, const MetaList& meta) {
  std::ostringstream out;
  append_meta(out, meta);
  out << "tau_fs,value\n";
  for (std::size_t k = 0; k < trace.values.size(); ++k)
    out << format_double(trace.grid.tau(k)) << "," << format_double(trace.values[k])
        << "\n";
  return out.str();
}

std::string spectrum_csv(const Spectrum& sp, const MetaList& meta) {
  std::ostringstream out;
  append_meta(out, meta);
  out << "omega_eV,magnitude\n";
  for (std::size_t i = 0; i < sp.frequencies.size(); ++i)
    out << format_double(sp.frequencies[i]) << "," << format_double(sp.magnitudes[i])
        << "\n";
  return out.str();
}

std::string spectrum_svg(const Spectrum& sp, const std::vector<double>& expected_lines,
                         const PeakSet* peaks, const std::string& title,
                         const MetaList& meta) {
  const double width = 960, height = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  // Plot range: a margin past the outermost feature, capped at Nyquist.
  double fmax = 0.0;
  for (double f : expected_lines) fmax = std::max(fmax, std::abs(f));
  if (peaks)
    for (const auto& p : peaks->peaks) fmax = std::max(fmax, std::abs(p.frequency));
  if (fmax <= 0.0) fmax = sp.omega_max;
  fmax = std::min(1.25 * fmax, sp.omega_max);

  double ymax = 0.0;
  for (std::size_t i = 0; i < sp.frequencies.size(); ++i)
    if (std::abs(sp.frequencies[i]) <= fmax) ymax = std::max(ymax, sp.magnitudes[i]);
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.05;

  const auto px = [&](double f) { return ml + (f + fmax) / (2.0 * fmax) * pw; };
  const auto py = [&](double m) { return mt + ph - std::clamp(m / ymax, 0.0, 1.0) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " "
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<desc>";
  for (const auto& [key, value] : meta) out << key << "=" << value << " ";
  out << "</desc>\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-size=\"15\">" << title << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  const int n_ticks = 8;
  for (int t = 0; t <= n_ticks; ++t) {
    const double f = -fmax + 2.0 * fmax * t / n_ticks;
    const double x = px(f);
    out << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x
        << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    char label[32];
    std::snprintf(label, sizeof label, "%.3g", f);
    out << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << label << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\">angular frequency (eV)</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">magnitude</text>\n";

  // expected line markers (triangles above the axis)
  for (double f : expected_lines) {
    if (std::abs(f) > fmax) continue;
    const double x = px(f);
    out << "<path d=\"M" << x - 5 << " " << mt + 12 << " L" << x + 5 << " "
        << mt + 12 << " L" << x << " " << mt + 22
        << " Z\" fill=\"#d62728\" opacity=\"0.8\"/>\n";
  }

  // spectrum polyline, max-pooled so peaks survive decimation
  const std::size_t buckets = 1600;
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  std::size_t start = 0;
  while (start < sp.frequencies.size() && sp.frequencies[start] < -fmax) ++start;
  std::size_t stop = sp.frequencies.size();
  while (stop > start && sp.frequencies[stop - 1] > fmax) --stop;
  const std::size_t count = stop - start;
  const std::size_t step = std::max<std::size_t>(1, count / buckets);
  for (std::size_t i = start; i < stop; i += step) {
    const std::size_t end = std::min(i + step, stop);
    std::size_t best = i;
    for (std::size_t k = i; k < end; ++k)
      if (sp.magnitudes[k] > sp.magnitudes[best]) best = k;
    char pt[64];
    std::snprintf(pt, sizeof pt, "%.2f,%.2f ", px(sp.frequencies[best]),
                  py(sp.magnitudes[best]));
    out << pt;
  }
  out << "\"/>\n";

  // detected peaks
  if (peaks) {
    for (const auto& p : peaks->peaks) {
      if (std::abs(p.frequency) > fmax) continue;
      out << "<circle cx=\"" << px(p.frequency) << "\" cy=\"" << py(p.magnitude)
          << "\" r=\"5\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("ETPA_LOG");
    if (env == nullptr) return LogLevel::Warn;
    const std::string s(env);
    if (s == "quiet") return LogLevel::Quiet;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

namespace {
void emit(LogLevel at_least, const char* tag, const std::string& msg) {
  if (log_level() >= at_least) std::cerr << "[" << tag << "] " << msg << "\n";
}
}  // namespace

void log_warn(const std::string& msg) { emit(LogLevel::Warn, "warn", msg); }
void log_info(const std::string& msg) { emit(LogLevel::Info, "info", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::Debug, "debug", msg); }

}  // namespace etpa
