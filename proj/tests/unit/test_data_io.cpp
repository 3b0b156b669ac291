#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "test_util.hpp"
#include "tsimg/data_io.hpp"

namespace tsimg {
namespace {

namespace fs = std::filesystem;
using testing::code_of;
using testing::random_matrix;

class DataIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tsimg_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

std::string ett_text(int rows, bool header = true) {
  std::string s = header ? "date,HUFL,OT\n" : "";
  for (int i = 0; i < rows; ++i) {
    s += "2016-07-01 " + std::string(i < 10 ? "0" : "") + std::to_string(i) + ":00," + std::to_string(i) + "," +
         std::to_string(2 * i) + ".5\n";
  }
  return s;
}

TEST_F(DataIo, EttColumnsAndRows) {
  DatasetManifest m;
  m.path = write("ett.csv", ett_text(10));
  const MultivariateSeries s = load_ett_csv(m);
  EXPECT_EQ(s.variates(), 2);
  EXPECT_EQ(s.length(), 10);
  EXPECT_EQ(s.variate_names, (std::vector<std::string>{"HUFL", "OT"}));
  EXPECT_EQ(s.values(1, 3), 6.5);
  m.variate_columns = {"OT"};
  const MultivariateSeries ot = load_ett_csv(m);
  EXPECT_EQ(ot.variates(), 1);
  EXPECT_EQ(ot.values(0, 9), 18.5);
  m.path = write("plain.csv", ett_text(4, false));
  m.variate_columns.clear();
  EXPECT_EQ(load_ett_csv(m).length(), 4);
}

TEST_F(DataIo, EttSevenVariates) {
  std::string text = "date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT\n";
  for (int i = 0; i < 5; ++i) text += std::to_string(i) + ",1,2,3,4,5,6,7\n";
  DatasetManifest m;
  m.path = write("etth1.csv", text);
  EXPECT_EQ(load_ett_csv(m).variates(), 7);
}

TEST_F(DataIo, EttMalformedRowNamesLine) {
  std::string text = ett_text(10);
  // Physical line 7 (header is line 1) loses a cell.
  std::vector<std::string> lines;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  lines[6] = "2016-07-01 05:00,5";
  std::string broken;
  for (const auto& l : lines) broken += l + "\n";
  DatasetManifest m;
  m.path = write("broken.csv", broken);
  try {
    load_ett_csv(m);
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find(":7"), std::string::npos) << e.what();
  }
}

TEST_F(DataIo, EttRejectsBadCells) {
  DatasetManifest m;
  m.path = write("nan.csv", "t,a\n1,2\n2,nan\n");
  EXPECT_EQ(code_of([&] { load_ett_csv(m); }), ErrorCode::NonNumericCell);
  m.path = write("text.csv", "t,a\n1,2\n2,abc\n");
  EXPECT_EQ(code_of([&] { load_ett_csv(m); }), ErrorCode::NonNumericCell);
  m.path = write("empty.csv", "");
  EXPECT_EQ(code_of([&] { load_ett_csv(m); }), ErrorCode::EmptyFile);
  m.path = write("back.csv", "t,a\n2,1\n1,2\n");
  EXPECT_EQ(code_of([&] { load_ett_csv(m); }), ErrorCode::ParseError);
  m.path = dir_ / "missing.csv";
  EXPECT_EQ(code_of([&] { load_ett_csv(m); }), ErrorCode::IoError);
}

TEST_F(DataIo, LabeledWindows) {
  DatasetManifest m;
  m.format = DatasetFormat::LabeledWindowsCsv;
  m.path = write("w.csv", "1,2,3,4,5,0\n5,4,3,2,1,1\n0,0,0,0,0,0\n1,1,1,1,1,1\n");
  const LabeledWindows w = load_labeled_windows_csv(m);
  ASSERT_EQ(w.samples.size(), 4u);
  EXPECT_EQ(w.num_classes, 2);
  EXPECT_EQ(w.samples[1].lookback.cols(), 5);
  EXPECT_EQ(w.samples[1].lookback(0, 0), 5.0);
  EXPECT_EQ(*w.samples[1].class_label, 1);

  m.variates = 2;
  m.label_column = "y";
  m.path = write("w2.csv", "y,a0,a1,b0,b1\n3,1,2,3,4\n");
  const LabeledWindows v = load_labeled_windows_csv(m);
  EXPECT_EQ(v.num_classes, 4);
  EXPECT_EQ(v.samples[0].lookback, (Matrix(2, 2) << 1, 2, 3, 4).finished());
}

TEST_F(DataIo, LabeledWindowErrors) {
  DatasetManifest m;
  m.format = DatasetFormat::LabeledWindowsCsv;
  m.path = write("w.csv", "1,2,0\n1,2,1\n1,2,3,0\n");
  EXPECT_EQ(code_of([&] { load_labeled_windows_csv(m); }), ErrorCode::InconsistentWidth);
  m.path = write("l.csv", "1,2,0\n1,2,0.5\n");
  EXPECT_EQ(code_of([&] { load_labeled_windows_csv(m); }), ErrorCode::LabelNotInteger);
  m.path = write("e.csv", "");
  EXPECT_EQ(code_of([&] { load_labeled_windows_csv(m); }), ErrorCode::EmptyFile);
}

TEST_F(DataIo, PgmFormatAndRoundTrip) {
  Matrix px(2, 2);
  px << -1.0, 0.5, 2.0, 3.0;
  const fs::path p = dir_ / "a.pgm";
  write_pgm(GrayImage(px), p);
  const std::string text = read(p);
  EXPECT_EQ(text.rfind("P2\n", 0), 0u);
  EXPECT_NE(text.find("\n2 2\n65535\n"), std::string::npos);
  const GrayImage back = read_pgm(p);
  EXPECT_LE((back.pixels - px).cwiseAbs().maxCoeff(), 4.0 / 65535.0);
  EXPECT_EQ(back(0, 0), -1.0);
  EXPECT_EQ(back(1, 1), 3.0);

  write_pgm(GrayImage(2, 3, 7.25), p);
  const std::string flat = read(p);
  EXPECT_NE(flat.find("min=7.25 max=7.25"), std::string::npos);
  EXPECT_NE(flat.find("\n0 0 0\n0 0 0\n"), std::string::npos);
  EXPECT_TRUE((read_pgm(p).pixels.array() == 7.25).all());
}

TEST_F(DataIo, CheckpointRoundTripIsBitwise) {
  Rng rng(4);
  ParamSet p;
  p.add("a", random_matrix(rng, 3, 4));
  p.add("b.c", Matrix::Constant(1, 1, -0.0));
  p.add("z", Matrix::Constant(2, 1, std::numeric_limits<double>::denorm_min()));
  const fs::path path = dir_ / "m.ckpt";
  save_checkpoint(p, path);
  EXPECT_TRUE(load_checkpoint(path).identical_to(p));
  EXPECT_TRUE(std::signbit(load_checkpoint(path).at("b.c")(0, 0)));
}

TEST_F(DataIo, CheckpointCorruption) {
  Rng rng(5);
  ParamSet p;
  p.add("w", random_matrix(rng, 2, 2));
  const fs::path path = dir_ / "m.ckpt";
  save_checkpoint(p, path);
  const std::string bytes = read(path);

  const fs::path truncated = write("t.ckpt", bytes.substr(0, bytes.size() - 3));
  EXPECT_EQ(code_of([&] { load_checkpoint(truncated); }), ErrorCode::CorruptFile);
  const fs::path trailing = write("x.ckpt", bytes + "!");
  EXPECT_EQ(code_of([&] { load_checkpoint(trailing); }), ErrorCode::CorruptFile);
  std::string bumped = bytes;
  bumped[8] = static_cast<char>(kCheckpointVersion + 1);
  const fs::path version = write("v.ckpt", bumped);
  EXPECT_EQ(code_of([&] { load_checkpoint(version); }), ErrorCode::VersionMismatch);
  std::string magic = bytes;
  magic[0] = 'X';
  const fs::path bad_magic = write("g.ckpt", magic);
  EXPECT_EQ(code_of([&] { load_checkpoint(bad_magic); }), ErrorCode::CorruptFile);
}

TEST(Doubles, ShortestRoundTrip) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal(0.0, 1e3) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(code_of([] { parse_double("1,5"); }), ErrorCode::ParseError);
}

TEST_F(DataIo, ResultsCsvAppendAndReplay) {
  std::vector<ResultRow> rows(2);
  rows[0].experiment_id = "segment";
  rows[0].axis_value = "24";
  rows[0].mse = 0.125;
  rows[0].mae = 1.0 / 3.0;
  rows[0].n_value = 1;
  rows[1].experiment_id = "clean";
  rows[1].axis_value = "test";
  rows[1].accuracy = 0.75;

  std::ostringstream out;
  write_results_csv(out, rows);
  EXPECT_EQ(out.str(), std::string(kResultsHeader) +
                           "\nsegment,24,0.125,0.3333333333333333,,1,\nclean,test,,,0.75,,\n");

  const fs::path path = dir_ / "results.csv";
  append_results_csv(path, {rows[0]});
  append_results_csv(path, {rows[1]});
  const auto back = read_results_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].mae, rows[0].mae);
  EXPECT_EQ(back[0].n_value, 1);
  EXPECT_FALSE(back[0].accuracy.has_value());
  EXPECT_EQ(back[1].accuracy, 0.75);
  EXPECT_EQ(read(path), out.str());
}

TEST_F(DataIo, HistoryAndKeyValues) {
  History h;
  h.epochs.push_back({1, 0.5, 0.25, 0.0});
  const fs::path p = dir_ / "history.csv";
  write_history_csv(h, p);
  EXPECT_EQ(read(p).rfind("epoch,train_loss,val_metric,seconds\n1,0.5,0.25,", 0), 0u);
  write_key_values({{"seed", "7"}, {"method", "uvh"}}, dir_ / "config.txt");
  EXPECT_EQ(read(dir_ / "config.txt"), "seed = 7\nmethod = uvh\n");
}

TEST(Manifest, Validation) {
  DatasetManifest m;
  m.ratios = {0.5, 0.1, 0.1};
  EXPECT_EQ(code_of([&] { m.validate(); }), ErrorCode::InvalidArgument);
  for (DatasetFormat f : {DatasetFormat::EttCsv, DatasetFormat::LabeledWindowsCsv, DatasetFormat::Synthetic}) {
    EXPECT_EQ(parse_dataset_format(to_string(f)), f);
  }
}

}  // namespace
}  // namespace tsimg
