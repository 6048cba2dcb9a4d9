#include "ersim/tables.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ersim/error.hpp"

namespace ersim {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvTable::add(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_number(v));
  rows.push_back(std::move(row));
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows.at(row).at(col);
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError("row " + std::to_string(row + 1) + ", column '" + header.at(col) + "': not a number: " + s);
  return v;
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream os;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const auto b = cell.find_first_not_of(' ');
      const auto e = cell.find_last_not_of(' ');
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw FormatError("row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                          " cells, header has " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw FormatError("empty CSV file");
  return t;
}

void write_csv(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << to_csv(table);
  if (!out) throw IoError("write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

CsvTable spectrum_table(const Spectrum& spectrum) {
  CsvTable t;
  t.header = {"frequency_hz", "counts"};
  for (const auto& p : spectrum.points) t.add({p.frequency, p.counts});
  return t;
}

Spectrum spectrum_from_table(const CsvTable& table) {
  const auto f = table.column("frequency_hz");
  if (!f) throw FormatError("spectrum CSV needs a frequency_hz column");
  std::optional<std::size_t> y = table.column("counts");
  for (std::size_t i = 0; i < table.header.size() && !y; ++i)
    if (i != *f) y = i;
  if (!y) throw FormatError("spectrum CSV needs a value column next to frequency_hz");
  Spectrum s;
  for (std::size_t r = 0; r < table.rows.size(); ++r) s.points.push_back({table.number(r, *f), table.number(r, *y)});
  s.validate();
  return s;
}

CsvTable histogram_table(const DecayHistogram& hist) {
  CsvTable t;
  t.header = {"bin_start_s", "bin_end_s", "counts"};
  for (std::size_t k = 0; k < hist.bins(); ++k) t.add({hist.edge(k), hist.edge(k + 1), hist.counts[k]});
  return t;
}

DecayHistogram histogram_from_table(const CsvTable& table) {
  const auto a = table.column("bin_start_s");
  const auto b = table.column("bin_end_s");
  const auto c = table.column("counts");
  if (!a || !b || !c) throw FormatError("histogram CSV needs bin_start_s, bin_end_s and counts columns");
  if (table.rows.empty()) throw FormatError("histogram CSV has no rows");
  DecayHistogram h;
  h.bin_width = table.number(0, *b) - table.number(0, *a);
  if (!(h.bin_width > 0.0)) throw FormatError("histogram bins must have positive width");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double w = table.number(r, *b) - table.number(r, *a);
    if (std::abs(w - h.bin_width) > 1e-9 * h.bin_width) throw FormatError("histogram bins must be uniform");
    const double start = table.number(r, *a);
    if (std::abs(start - h.bin_width * static_cast<double>(r)) > 1e-6 * h.bin_width)
      throw FormatError("histogram bins must be contiguous from zero delay");
    const double n = table.number(r, *c);
    if (!(n >= 0.0)) throw FormatError("histogram counts must be non-negative");
    h.counts.push_back(n);
  }
  return h;
}

CsvTable correlation_table(const CorrelationHistogram& hist, const CorrelationColumns& extra) {
  CsvTable t;
  t.header = {"offset_shots", "delay_us", "coincidences", "shot_pairs", "g2_raw", "g2_error"};
  if (extra.rho) t.header.push_back("g2_corrected");
  if (extra.floor) t.header.push_back("dark_floor_coincidences");
  for (int d = -hist.max_offset; d <= hist.max_offset; ++d) {
    const std::size_t i = hist.index(d);
    std::vector<double> row = {static_cast<double>(d), d * hist.t_rep * 1e6, hist.coincidences[i],
                               hist.shot_pairs[i], hist.g2[i], hist.g2_error[i]};
    if (extra.rho)
      row.push_back(std::isfinite(hist.g2[i]) ? background_corrected_g2(hist.g2[i], *extra.rho) : hist.g2[i]);
    if (extra.floor) row.push_back(extra.floor->at(i));
    t.add(row);
  }
  return t;
}

CsvTable fit_table(const FitResult& fit) {
  CsvTable t;
  t.header = {"parameter", "value", "uncertainty", "unit"};
  for (const auto& p : fit.parameters)
    t.rows.push_back({p.name, format_number(p.value), format_number(p.uncertainty), p.unit.empty() ? "1" : p.unit});
  t.rows.push_back({"status", std::string(to_string(fit.status)), "", ""});
  t.rows.push_back({"rss", format_number(fit.rss), "", ""});
  t.rows.push_back({"iterations", std::to_string(fit.iterations), "", ""});
  return t;
}

CsvTable diffusion_map_table(const SpectralDiffusionMap& map) {
  CsvTable t;
  t.header = {"scan", "frequency_hz", "counts"};
  for (std::size_t s = 0; s < map.counts.size(); ++s)
    for (std::size_t j = 0; j < map.frequencies.size(); ++j)
      t.add({static_cast<double>(s), map.frequencies[j], map.counts[s][j]});
  return t;
}

}  // namespace ersim
