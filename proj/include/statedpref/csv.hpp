#pragma once

#include "statedpref/dgp.hpp"
#include "statedpref/panel.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace statedpref {

//! Shortest round-trip decimal representation.
std::string format_double(double v);

//! Header-indexed CSV contents. Fields are unquoted, comma-separated.
struct CsvTable
{
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  //! Index of a required column; throws ValidationError naming the file.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, std::size_t col) const;
  long long integer(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<StatedRecord> read_stated_csv(const std::filesystem::path& path);
std::vector<ActualRecord> read_actual_csv(const std::filesystem::path& path);
//! person_id,member
std::map<PersonId, int> read_membership_csv(const std::filesystem::path& path);

//! Stated plus (optional) actual file; t_count is inferred from scenario ids.
PseudoPanel read_panel(const std::filesystem::path& stated,
                       const std::filesystem::path& actual = {});

class CsvWriter
{
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

private:
  std::ofstream out_;
  std::size_t width_;
};

void write_stated_csv(const std::filesystem::path& path, const std::vector<StatedRecord>& stated);
void write_actual_csv(const std::filesystem::path& path, const std::vector<ActualRecord>& actual);
void write_latent_csv(const std::filesystem::path& path, const LatentTruth& latent);

//! Writes `<csv>.meta` next to an output CSV: one key=value line per entry.
void write_metadata(const std::filesystem::path& csv_path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

} // namespace statedpref
