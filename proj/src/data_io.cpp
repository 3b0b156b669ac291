#include "tsimg/data_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tsimg/error.hpp"

namespace tsimg {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'S', 'I', 'M', 'G', 'C', 'K', 'P'};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    cells.push_back(trim(line.substr(begin, comma == std::string_view::npos ? std::string_view::npos : comma - begin)));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return cells;
}

std::optional<double> try_parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false, bool append = false) {
  std::ios::openmode mode = std::ios::out;
  if (binary) mode |= std::ios::binary;
  mode |= append ? std::ios::app : std::ios::trunc;
  std::ofstream out(path, mode);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

struct CsvLine {
  int number = 0;  // 1-based line in the file
  std::vector<std::string> cells;
};

// Non-blank lines split into cells.
std::vector<CsvLine> read_csv_lines(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<CsvLine> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    CsvLine parsed{number, {}};
    for (std::string_view cell : split_cells(line)) parsed.cells.emplace_back(cell);
    lines.push_back(std::move(parsed));
  }
  if (lines.empty()) fail(ErrorCode::EmptyFile, path.string() + " has no data");
  return lines;
}

std::string where(const std::filesystem::path& path, int line) {
  return path.string() + ":" + std::to_string(line);
}

double numeric_cell(const std::filesystem::path& path, const CsvLine& line, std::size_t col) {
  const std::optional<double> v = try_parse_double(line.cells[col]);
  if (!v || !std::isfinite(*v)) {
    fail(ErrorCode::NonNumericCell, where(path, line.number) + ": column " + std::to_string(col + 1) + " ('" +
                                        line.cells[col] + "') is not a finite number");
  }
  return *v;
}

bool any_non_numeric(const CsvLine& line, std::size_t from) {
  for (std::size_t c = from; c < line.cells.size(); ++c) {
    if (!try_parse_double(line.cells[c])) return true;
  }
  return false;
}

bool timestamp_before(const std::string& a, const std::string& b) {
  const auto na = try_parse_double(a);
  const auto nb = try_parse_double(b);
  if (na && nb) return *na < *nb;
  return a < b;
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  Reader(const std::string& data, const std::filesystem::path& path) : data_(data), path_(path) {}

  const char* take(std::size_t n) {
    if (data_.size() - pos_ < n) fail(ErrorCode::CorruptFile, path_.string() + " is truncated");
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint64_t uint(int bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(take(static_cast<std::size_t>(bytes)));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string_view to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::EttCsv: return "ett_csv";
    case DatasetFormat::LabeledWindowsCsv: return "labeled_windows_csv";
    case DatasetFormat::Synthetic: return "synthetic";
  }
  return "unknown";
}

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
  for (DatasetFormat f : {DatasetFormat::EttCsv, DatasetFormat::LabeledWindowsCsv, DatasetFormat::Synthetic}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

void DatasetManifest::validate() const {
  require(ratios.train >= 0 && ratios.val >= 0 && ratios.test >= 0, ErrorCode::InvalidArgument,
          "split ratios must be non-negative");
  require(std::abs(ratios.train + ratios.val + ratios.test - 1.0) < 1e-9, ErrorCode::InvalidArgument,
          "split ratios must sum to 1");
  require(variates >= 1, ErrorCode::InvalidArgument, "variates must be >= 1");
}

MultivariateSeries load_ett_csv(const DatasetManifest& manifest) {
  manifest.validate();
  const std::vector<CsvLine> lines = read_csv_lines(manifest.path);
  const std::size_t width = lines.front().cells.size();
  if (width < 2) {
    fail(ErrorCode::ParseError, where(manifest.path, lines.front().number) +
                                    ": expected a timestamp column and at least one value column");
  }
  const bool has_header = any_non_numeric(lines.front(), 1);
  std::vector<std::string> names;
  for (std::size_t c = 1; c < width; ++c) {
    names.push_back(has_header ? lines.front().cells[c] : "v" + std::to_string(c - 1));
  }

  std::vector<std::size_t> keep;
  if (manifest.variate_columns.empty()) {
    for (std::size_t c = 1; c < width; ++c) keep.push_back(c);
  } else {
    require(has_header, ErrorCode::InvalidArgument, "selecting columns by name needs a header row");
    for (const std::string& want : manifest.variate_columns) {
      const auto it = std::find(names.begin(), names.end(), want);
      if (it == names.end()) fail(ErrorCode::InvalidArgument, "column '" + want + "' not found in header");
      keep.push_back(static_cast<std::size_t>(it - names.begin()) + 1);
    }
  }

  const std::size_t first = has_header ? 1 : 0;
  if (lines.size() <= first) fail(ErrorCode::EmptyFile, manifest.path.string() + " has a header but no rows");
  Matrix values(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(lines.size() - first));
  for (std::size_t i = first; i < lines.size(); ++i) {
    const CsvLine& line = lines[i];
    if (line.cells.size() != width) {
      fail(ErrorCode::ParseError, where(manifest.path, line.number) + ": expected " + std::to_string(width) +
                                      " cells, found " + std::to_string(line.cells.size()));
    }
    if (i > first && timestamp_before(line.cells[0], lines[i - 1].cells[0])) {
      fail(ErrorCode::ParseError, where(manifest.path, line.number) + ": timestamp '" + line.cells[0] +
                                      "' goes backwards");
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
      values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i - first)) =
          numeric_cell(manifest.path, line, keep[k]);
    }
  }
  std::vector<std::string> kept_names;
  for (std::size_t c : keep) kept_names.push_back(names[c - 1]);
  return MultivariateSeries(std::move(values), std::move(kept_names));
}

LabeledWindows load_labeled_windows_csv(const DatasetManifest& manifest) {
  manifest.validate();
  const std::vector<CsvLine> lines = read_csv_lines(manifest.path);
  const std::size_t width = lines.front().cells.size();
  const bool has_header = any_non_numeric(lines.front(), 0);
  std::size_t label_col = width - 1;
  if (!manifest.label_column.empty()) {
    require(has_header, ErrorCode::InvalidArgument, "selecting the label column by name needs a header row");
    const auto& header = lines.front().cells;
    const auto it = std::find(header.begin(), header.end(), manifest.label_column);
    if (it == header.end()) fail(ErrorCode::InvalidArgument, "label column '" + manifest.label_column + "' not found");
    label_col = static_cast<std::size_t>(it - header.begin());
  }
  if (width < 2 || (width - 1) % static_cast<std::size_t>(manifest.variates) != 0) {
    fail(ErrorCode::InconsistentWidth, std::to_string(width - 1) + " value columns do not split into " +
                                           std::to_string(manifest.variates) + " variates");
  }
  const int T = static_cast<int>((width - 1) / static_cast<std::size_t>(manifest.variates));

  const std::size_t first = has_header ? 1 : 0;
  if (lines.size() <= first) fail(ErrorCode::EmptyFile, manifest.path.string() + " has a header but no rows");
  LabeledWindows out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const CsvLine& line = lines[i];
    if (line.cells.size() != width) {
      fail(ErrorCode::InconsistentWidth, where(manifest.path, line.number) + ": expected " + std::to_string(width) +
                                             " cells, found " + std::to_string(line.cells.size()));
    }
    const std::string& label_text = line.cells[label_col];
    int label = 0;
    const auto [ptr, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
    if (ec != std::errc() || ptr != label_text.data() + label_text.size() || label < 0) {
      fail(ErrorCode::LabelNotInteger,
           where(manifest.path, line.number) + ": label '" + label_text + "' is not a non-negative integer");
    }
    WindowSample sample;
    sample.lookback.resize(manifest.variates, T);
    int k = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      sample.lookback(k / T, k % T) = numeric_cell(manifest.path, line, c);
      ++k;
    }
    sample.class_label = label;
    sample.start = static_cast<int>(i - first);
    out.num_classes = std::max(out.num_classes, label + 1);
    out.samples.push_back(std::move(sample));
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  require(img.height() >= 1 && img.width() >= 1, ErrorCode::EmptyInput, "cannot write an empty image");
  const double lo = img.pixels.minCoeff();
  const double hi = img.pixels.maxCoeff();
  std::ofstream out = open_out(path);
  out << "P2\n# min=" << format_double(lo) << " max=" << format_double(hi) << "\n"
      << img.width() << " " << img.height() << "\n65535\n";
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const long q = hi > lo ? std::lround((img(r, c) - lo) / (hi - lo) * 65535.0) : 0;
      out << (c ? " " : "") << q;
    }
    out << "\n";
  }
  check_written(out, path);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::string> tokens;
  std::optional<double> lo, hi;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      std::istringstream comment(line.substr(hash + 1));
      std::string field;
      while (comment >> field) {
        if (field.rfind("min=", 0) == 0) lo = try_parse_double(std::string_view(field).substr(4));
        if (field.rfind("max=", 0) == 0) hi = try_parse_double(std::string_view(field).substr(4));
      }
      line.erase(hash);
    }
    std::istringstream words(line);
    std::string w;
    while (words >> w) tokens.push_back(w);
  }
  if (tokens.empty()) fail(ErrorCode::EmptyFile, path.string() + " is empty");
  if (tokens[0] != "P2") fail(ErrorCode::ParseError, path.string() + ": not a plain PGM (P2) file");
  auto integer = [&](std::size_t i) {
    if (i >= tokens.size()) fail(ErrorCode::CorruptFile, path.string() + ": pixel data is truncated");
    long v = 0;
    const std::string& t = tokens[i];
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || v < 0) {
      fail(ErrorCode::ParseError, path.string() + ": bad integer '" + t + "'");
    }
    return v;
  };
  const long width = integer(1);
  const long height = integer(2);
  const long maxval = integer(3);
  require(width >= 1 && height >= 1 && maxval >= 1, ErrorCode::ParseError, path.string() + ": bad PGM header");
  if (tokens.size() != 4 + static_cast<std::size_t>(width * height)) {
    fail(ErrorCode::CorruptFile, path.string() + ": expected " + std::to_string(width * height) + " pixels");
  }
  const double base = lo.value_or(0.0);
  const double range = (lo && hi) ? *hi - *lo : static_cast<double>(maxval);
  GrayImage img(static_cast<int>(height), static_cast<int>(width));
  for (long i = 0; i < width * height; ++i) {
    const long q = integer(4 + static_cast<std::size_t>(i));
    require(q <= maxval, ErrorCode::ParseError, path.string() + ": pixel exceeds maxval");
    img(static_cast<int>(i / width), static_cast<int>(i % width)) =
        base + static_cast<double>(q) / static_cast<double>(maxval) * range;
  }
  return img;
}

void write_pixels_csv(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out << (c ? "," : "") << format_double(img(r, c));
    out << "\n";
  }
  check_written(out, path);
}

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path) {
  std::string buf(kMagic.begin(), kMagic.end());
  buf.push_back(static_cast<char>(kCheckpointVersion));
  put_u32(buf, static_cast<std::uint32_t>(params.tensor_count()));
  for (const auto& [name, m] : params) {
    put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf += name;
    put_u32(buf, static_cast<std::uint32_t>(m.rows()));
    put_u32(buf, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_u64(buf, std::bit_cast<std::uint64_t>(m(r, c)));
    }
  }
  std::ofstream out = open_out(path, true);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  check_written(out, path);
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, true);
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader rd(data, path);
  if (data.size() < kMagic.size() || std::memcmp(data.data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorCode::CorruptFile, path.string() + " is not a checkpoint");
  }
  rd.take(kMagic.size());
  const auto version = static_cast<std::uint8_t>(rd.uint(1));
  if (version != kCheckpointVersion) {
    fail(ErrorCode::VersionMismatch, path.string() + " has format version " + std::to_string(version) +
                                         ", expected " + std::to_string(kCheckpointVersion));
  }
  const auto count = rd.uint(4);
  ParamSet params;
  for (std::uint64_t t = 0; t < count; ++t) {
    const auto name_len = rd.uint(4);
    const std::string name(rd.take(name_len), name_len);
    const auto rows = rd.uint(4);
    const auto cols = rd.uint(4);
    if (rows * cols > rd.remaining() / 8) fail(ErrorCode::CorruptFile, path.string() + " is truncated");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = std::bit_cast<double>(rd.uint(8));
    }
    if (params.contains(name)) fail(ErrorCode::CorruptFile, path.string() + " repeats tensor " + name);
    params.add(name, std::move(m));
  }
  if (!rd.done()) fail(ErrorCode::CorruptFile, path.string() + " has trailing bytes");
  return params;
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) fail(ErrorCode::InvalidArgument, "cannot format number");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  const std::optional<double> v = try_parse_double(text);
  if (!v) fail(ErrorCode::ParseError, "'" + std::string(text) + "' is not a number");
  return *v;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool header) {
  if (header) out << kResultsHeader << "\n";
  for (const ResultRow& r : rows) {
    out << r.experiment_id << "," << r.axis_value << "," << optional_cell(r.mse) << "," << optional_cell(r.mae) << ","
        << optional_cell(r.accuracy) << "," << (r.n_value ? std::to_string(*r.n_value) : std::string()) << ","
        << optional_cell(r.seconds) << "\n";
  }
}

void append_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out = open_out(path, false, true);
  write_results_csv(out, rows, fresh);
  check_written(out, path);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  const std::vector<CsvLine> lines = read_csv_lines(path);
  std::vector<ResultRow> rows;
  auto opt = [&](const CsvLine& line, std::size_t c) -> std::optional<double> {
    if (line.cells[c].empty()) return std::nullopt;
    const auto v = try_parse_double(line.cells[c]);
    if (!v) fail(ErrorCode::ParseError, where(path, line.number) + ": bad number '" + line.cells[c] + "'");
    return v;
  };
  for (const CsvLine& line : lines) {
    if (line.cells.size() != 7) {
      fail(ErrorCode::ParseError, where(path, line.number) + ": expected 7 cells");
    }
    if (line.cells[0] == "experiment_id") continue;
    ResultRow r;
    r.experiment_id = line.cells[0];
    r.axis_value = line.cells[1];
    r.mse = opt(line, 2);
    r.mae = opt(line, 3);
    r.accuracy = opt(line, 4);
    if (const auto n = opt(line, 5)) r.n_value = static_cast<int>(*n);
    r.seconds = opt(line, 6);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_history_csv(const History& history, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "epoch,train_loss,val_metric,seconds\n";
  for (const EpochRecord& e : history.epochs) {
    out << e.epoch << "," << format_double(e.train_loss) << "," << format_double(e.val_metric) << ","
        << format_double(e.seconds) << "\n";
  }
  check_written(out, path);
}

void write_key_values(const std::vector<std::pair<std::string, std::string>>& entries,
                      const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
  check_written(out, path);
}

}  // namespace tsimg
