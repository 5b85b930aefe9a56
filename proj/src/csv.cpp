#include "statedpref/csv.hpp"

#include "statedpref/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

namespace statedpref {

std::string format_double(double v)
{
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ','))
    out.push_back(field);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  for (auto& f : out) {
    const auto first = f.find_first_not_of(" \t\r");
    const auto last = f.find_last_not_of(" \t\r");
    f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
  }
  return out;
}

} // namespace

CsvTable read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open " + path.string());
  CsvTable table;
  table.source = path.string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto fields = split(line);
    if (table.header.empty()) {
      if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF"))
        fields[0].erase(0, 3);
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw ValidationError(table.source + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty())
    throw ValidationError(table.source + ": missing header row");
  return table;
}

std::size_t CsvTable::column(const std::string& name) const
{
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw ValidationError(source + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::size_t col) const
{
  const std::string& s = rows[row][col];
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValidationError(source + ":" + std::to_string(line_numbers[row]) + ": column '" +
                          header[col] + "' is not a number: '" + s + "'");
  return v;
}

long long CsvTable::integer(std::size_t row, std::size_t col) const
{
  const std::string& s = rows[row][col];
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValidationError(source + ":" + std::to_string(line_numbers[row]) + ": column '" +
                          header[col] + "' is not an integer: '" + s + "'");
  return v;
}

std::vector<StatedRecord> read_stated_csv(const std::filesystem::path& path)
{
  const CsvTable t = read_csv(path);
  const auto id = t.column("person_id");
  const auto sc = t.column("scenario_id");
  const auto x = t.column("x");
  const auto p = t.column("p_star");
  std::vector<StatedRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({t.integer(r, id), static_cast<int>(t.integer(r, sc)), t.number(r, x),
                   t.number(r, p)});
  return out;
}

std::vector<ActualRecord> read_actual_csv(const std::filesystem::path& path)
{
  const CsvTable t = read_csv(path);
  const auto id = t.column("person_id");
  const auto x = t.column("x");
  const auto d = t.column("d");
  std::vector<ActualRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({t.integer(r, id), t.number(r, x), static_cast<int>(t.integer(r, d))});
  return out;
}

std::map<PersonId, int> read_membership_csv(const std::filesystem::path& path)
{
  const CsvTable t = read_csv(path);
  const auto id = t.column("person_id");
  const auto m = t.column("member");
  std::map<PersonId, int> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out[t.integer(r, id)] = static_cast<int>(t.integer(r, m));
  return out;
}

PseudoPanel read_panel(const std::filesystem::path& stated, const std::filesystem::path& actual)
{
  PseudoPanel panel;
  panel.stated = read_stated_csv(stated);
  if (!actual.empty())
    panel.actual = read_actual_csv(actual);
  panel.t_count = infer_t_count(panel.stated);
  return panel;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
  : out_(path, std::ios::binary | std::ios::trunc), width_(header.size())
{
  if (!out_)
    throw ValidationError("cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
  if (fields.size() != width_)
    throw ArgumentError("csv row width mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0)
      out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void write_stated_csv(const std::filesystem::path& path, const std::vector<StatedRecord>& stated)
{
  CsvWriter w(path, {"person_id", "scenario_id", "x", "p_star"});
  for (const auto& r : stated)
    w.row({std::to_string(r.person_id), std::to_string(r.scenario_id), format_double(r.x),
           format_double(r.p_star)});
}

void write_actual_csv(const std::filesystem::path& path, const std::vector<ActualRecord>& actual)
{
  CsvWriter w(path, {"person_id", "x", "d"});
  for (const auto& r : actual)
    w.row({std::to_string(r.person_id), format_double(r.x), std::to_string(r.d)});
}

void write_latent_csv(const std::filesystem::path& path, const LatentTruth& latent)
{
  CsvWriter w(path, {"person_id", "eta1", "eta2", "u"});
  for (const auto& r : latent.persons)
    w.row({std::to_string(r.person_id), format_double(r.eta1), format_double(r.eta2),
           format_double(r.u)});
}

void write_metadata(const std::filesystem::path& csv_path,
                    const std::vector<std::pair<std::string, std::string>>& entries)
{
  std::filesystem::path meta = csv_path;
  meta += ".meta";
  std::ofstream out(meta, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ValidationError("cannot write " + meta.string());
  for (const auto& [k, v] : entries)
    out << k << '=' << v << '\n';
}

} // namespace statedpref
