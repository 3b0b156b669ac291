#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsimg/imaging.hpp"
#include "tsimg/params.hpp"
#include "tsimg/series.hpp"
#include "tsimg/training.hpp"

namespace tsimg {

enum class DatasetFormat { EttCsv, LabeledWindowsCsv, Synthetic };

std::string_view to_string(DatasetFormat format);
std::optional<DatasetFormat> parse_dataset_format(std::string_view name);

struct DatasetManifest {
  std::filesystem::path path;
  DatasetFormat format = DatasetFormat::EttCsv;
  std::vector<std::string> variate_columns;  // ETT: header names to keep; empty keeps all
  std::string label_column;                  // labeled windows: header name; empty means last column
  int variates = 1;                          // labeled windows: d of each flattened d x T row
  SplitRatios ratios;

  /// Ratios non-negative and summing to 1; labeled windows need variates >= 1.
  void validate() const;
};

/// Leading timestamp column, then numeric variate columns. An optional header
/// row is recognized by non-numeric cells. Timestamps must not decrease.
MultivariateSeries load_ett_csv(const DatasetManifest& manifest);

struct LabeledWindows {
  std::vector<WindowSample> samples;
  int num_classes = 0;  // max label + 1
};

/// One row per sample: d*T values (variate-major) plus an integer label.
LabeledWindows load_labeled_windows_csv(const DatasetManifest& manifest);

/// Plain "P2" PGM scaled to [0, 65535]; a comment line keeps the original range.
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

/// Raw pixel values, one image row per line.
void write_pixels_csv(const GrayImage& img, const std::filesystem::path& path);

inline constexpr std::uint8_t kCheckpointVersion = 1;

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_checkpoint(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

struct ResultRow {
  std::string experiment_id;
  std::string axis_value;
  std::optional<double> mse;
  std::optional<double> mae;
  std::optional<double> accuracy;
  std::optional<int> n_value;
  std::optional<double> seconds;
};

inline constexpr std::string_view kResultsHeader = "experiment_id,axis_value,mse,mae,accuracy,n_value,seconds";

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool header = true);
/// Appends rows, writing the header first when the file is new or empty.
void append_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// epoch,train_loss,val_metric,seconds
void write_history_csv(const History& history, const std::filesystem::path& path);

/// "key = value" lines.
void write_key_values(const std::vector<std::pair<std::string, std::string>>& entries,
                      const std::filesystem::path& path);

}  // namespace tsimg
