#include "qfconv/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qfconv/errors.hpp"

namespace qfconv {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = line.find(',');
    out.push_back(trim(line.substr(0, c)));
    if (c == std::string_view::npos) break;
    line = line.substr(c + 1);
  }
  return out;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw ValidationError("CSV table needs at least one column");
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != header_.size()) {
    throw ValidationError("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                          std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& os) const {
  for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << quote_if_needed(header_[i]);
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&os](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              os << format_number(v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              os << v;
            } else {
              os << quote_if_needed(v);
            }
          },
          row[i]);
    }
    os << '\n';
  }
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(f);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Dataset parse_dataset_csv(std::string_view text) {
  std::size_t line_no = 0;
  bool have_header = false;
  Dataset data;
  bool with_sigma = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    if (!have_header) {
      if (cells.size() < 2) throw ValidationError("line " + std::to_string(line_no) + ": need at least x,y columns");
      data = Dataset(std::string(cells[0]), std::string(cells[1]));
      with_sigma = cells.size() >= 3;
      have_header = true;
      continue;
    }
    double v[3] = {0, 0, 0};
    const std::size_t need = with_sigma ? 3 : 2;
    if (cells.size() < need) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(need) + " columns");
    }
    for (std::size_t i = 0; i < need; ++i) {
      auto [p, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v[i]);
      if (ec != std::errc{} || p != cells[i].data() + cells[i].size() || !std::isfinite(v[i])) {
        throw ValidationError("line " + std::to_string(line_no) + ": not a number: '" + std::string(cells[i]) + "'");
      }
    }
    data.add(v[0], v[1], v[2]);
  }
  if (!have_header) throw ValidationError("empty CSV input");
  return data;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_dataset_csv(ss.str());
}

CsvTable dataset_table(const Dataset& data) {
  const bool sig = data.has_uncertainties();
  std::vector<std::string> header{data.x_label(), data.y_label()};
  if (sig) header.push_back("sigma");
  CsvTable t(std::move(header));
  for (const auto& p : data.points()) {
    std::vector<CsvCell> row{p.x, p.y};
    if (sig) row.emplace_back(p.sigma);
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace qfconv
