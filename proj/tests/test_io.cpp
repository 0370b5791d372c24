#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "probekit/errors.hpp"
#include "probekit/io.hpp"
#include "probekit/sim.hpp"

using namespace probekit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("probekit_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

ProbeLevelDataset small_dataset() {
  TwoGroupSpec spec;
  spec.n_genes = 4;
  return generate_two_group(spec, SimPreset{}, 7).data;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double is fixed point with six decimals") {
  CHECK(format_double(0.0) == "0.000000");
  CHECK(format_double(-4.5e-05) == "-0.000045");
  CHECK(format_double(1234567.125) == "1234567.125000");
  CHECK(format_double(2.0 / 3.0) == "0.666667");
  CHECK_THROWS_AS(format_double(std::nan("")), NumericalError);
  CHECK_THROWS_AS(format_double(1.0 / 0.0), NumericalError);
}

TEST_CASE("dataset TSV round trip is byte identical") {
  ProbeLevelDataset d = small_dataset();
  std::string once = dataset_to_tsv(d);
  ProbeLevelDataset back = dataset_from_tsv(once, "mem.tsv");
  CHECK(dataset_to_tsv(back) == once);
  CHECK(back.n_genes() == d.n_genes());
  CHECK(back.n_arrays() == d.n_arrays());
  CHECK(back.channels == d.channels);
  for (std::size_t g = 0; g < d.n_genes(); ++g)
    for (std::size_t k = 0; k < d.values[g].size(); ++k)
      CHECK(back.values[g][k] == doctest::Approx(d.values[g][k]).epsilon(1e-6));
}

TEST_CASE("file round trip through atomic writes") {
  TempDir tmp;
  ProbeLevelDataset d = small_dataset();
  fs::path p = tmp.path / "data.tsv";
  write_dataset_tsv(p, d);
  CHECK(!fs::exists(tmp.path / "data.tsv.tmp"));  // renamed away
  ProbeLevelDataset back = read_dataset_tsv(p);
  CHECK(dataset_to_tsv(back) == dataset_to_tsv(d));
}

TEST_CASE("parse errors carry file, line and column") {
  std::string header =
      "gene_id\tprobe_idx\tchannel\tarray_id\tcondition\tintensity\tsequence\n";
  std::string row = "g1\t1\tPM\ta1\t0\t10.5\tACGT\n";

  CHECK_THROWS_WITH_AS(dataset_from_tsv("", "f.tsv"), doctest::Contains("f.tsv:1:1"),
                       DataError);
  CHECK_THROWS_WITH_AS(dataset_from_tsv("wrong\theader\n", "f.tsv"),
                       doctest::Contains("bad header"), DataError);
  CHECK_THROWS_WITH_AS(dataset_from_tsv(header, "f.tsv"),
                       doctest::Contains("no data rows"), DataError);
  CHECK_THROWS_WITH_AS(
      dataset_from_tsv(header + "g1\t1\tPM\ta1\t0\t1e3\tACGT\n", "f.tsv"),
      doctest::Contains("f.tsv:2:6"), DataError);
  CHECK_THROWS_WITH_AS(
      dataset_from_tsv(header + "g1\t1\tPM\ta1\t0\t-5.0\tACGT\n", "f.tsv"),
      doctest::Contains("negative intensity"), DataError);
  CHECK_THROWS_WITH_AS(
      dataset_from_tsv(header + "g1\t0\tPM\ta1\t0\t5.0\tACGT\n", "f.tsv"),
      doctest::Contains("probe_idx must be >= 1"), DataError);
  CHECK_THROWS_WITH_AS(dataset_from_tsv(header + "g1\t1\tPM\ta1\t0\t5.0\n", "f.tsv"),
                       doctest::Contains("expected 7 tab-separated fields"), DataError);
  CHECK_THROWS_WITH_AS(dataset_from_tsv(header + row + row, "f.tsv"),
                       doctest::Contains("duplicate measurement"), DataError);
  // same array listed under two conditions
  CHECK_THROWS_WITH_AS(
      dataset_from_tsv(header + row + "g1\t2\tPM\ta1\t1\t10.5\tACGT\n", "f.tsv"),
      doctest::Contains("conflicting condition"), DataError);
  // a second channel appears for one probe but not the other
  std::string partial = header + row + "g1\t1\tMM\ta1\t0\t8.0\tACGT\n" +
                        "g1\t2\tPM\ta1\t0\t9.0\tTTTT\n";
  CHECK_THROWS_WITH_AS(dataset_from_tsv(partial, "f.tsv"),
                       doctest::Contains("incomplete dataset"), DataError);
}

TEST_CASE("CRLF input parses like LF input") {
  ProbeLevelDataset d = small_dataset();
  std::string lf = dataset_to_tsv(d);
  std::string crlf;
  for (char c : lf) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(dataset_to_tsv(dataset_from_tsv(crlf, "m")) == lf);
}

TEST_CASE("detections and diffexp tables round trip") {
  std::vector<DetectionResult> dets(2);
  dets[0].gene_id = "g1";
  dets[0].variant = DetectVariant::mas5;
  dets[0].statistic = 0.25;
  dets[0].p_value = 0.015625;
  dets[0].call = Call::present;
  dets[1].gene_id = "g2";
  dets[1].variant = DetectVariant::model_half_price;
  dets[1].statistic = -0.5;
  dets[1].p_value = 0.75;
  dets[1].call = Call::absent;
  std::string t = detections_to_tsv(dets);
  std::vector<DetectionResult> dback = detections_from_tsv(t, "d.tsv");
  CHECK(detections_to_tsv(dback) == t);
  CHECK(dback[1].variant == DetectVariant::model_half_price);
  CHECK(dback[0].call == Call::present);

  std::vector<GeneFitResult> fits(1);
  fits[0].gene_id = "g1";
  fits[0].beta0 = 5.25;
  fits[0].beta1 = -0.6875;
  fits[0].covariance(1, 1) = 0.0625;
  fits[0].p_value = 0.0225;
  fits[0].status = FitStatus::converged;
  fits[0].iterations = 7;
  std::string ft = diffexp_to_tsv(fits);
  std::vector<GeneFitResult> fback = diffexp_from_tsv(ft, "f.tsv");
  CHECK(diffexp_to_tsv(fback) == ft);
  CHECK(fback[0].covariance(1, 1) == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK(fback[0].iterations == 7);
  CHECK_THROWS_WITH_AS(diffexp_from_tsv("nope\n", "f.tsv"),
                       doctest::Contains("bad diffexp header"), DataError);
  CHECK_THROWS_WITH_AS(detections_from_tsv(t + "g3\tbogus\t0\t0.5\tA\n", "d.tsv"),
                       doctest::Contains("unknown variant"), DataError);
}

TEST_CASE("tag data and truth serialization") {
  TagScreenSpec spec;
  spec.n_tags = 5;
  TagSimResult sim = generate_tag_screen(spec, 3);
  std::string t = tag_data_to_tsv(sim);
  TagData back = tag_data_from_tsv(t, "tags.tsv");
  REQUIRE(back.ids.size() == 5);
  CHECK(back.ids == sim.ids);
  for (std::size_t k = 0; k < 5; ++k) {
    REQUIRE(back.log_r[k].size() == 2);
    CHECK(back.log_r[k][0] == doctest::Approx(sim.log_r[k][0]).epsilon(1e-6));
    CHECK(back.log_g[k][1] == doctest::Approx(sim.log_g[k][1]).epsilon(1e-6));
  }
  std::string truth = tag_truth_to_tsv(sim);
  CHECK(truth.rfind("tag\tdead_alive\tis_ratio_tag\ttrue_log_ratio\n", 0) == 0);
  CHECK(std::count(truth.begin(), truth.end(), '\n') == 6);  // header + 5 tags
}

TEST_CASE("tag result rows mark invalid ratios as NA") {
  std::vector<TagResult> rs(2);
  rs[0].id = "t1";
  rs[0].llr = 3.5;
  rs[0].classification = TagClass::dead_alive;
  rs[0].log_ratio_valid = false;
  rs[1].id = "t2";
  rs[1].llr = -2.0;
  rs[1].classification = TagClass::same;
  rs[1].log_ratio = std::log(2.0);
  rs[1].log_ratio_valid = true;
  std::string t = tag_results_to_tsv(rs);
  CHECK(t.find("t1\t3.500000\tdead_alive\tNA\tNA\n") != std::string::npos);
  CHECK(t.find("t2\t-2.000000\tsame\t0.693147\t1.000000\n") != std::string::npos);
}

TEST_CASE("score tables validate the truth column") {
  std::string good = "id\tscore\ttruth\na\t0.5\t1\nb\t-0.25\t0\n";
  std::vector<ScoreRow> rows = scores_from_tsv(good, "s.tsv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].id == "a");
  CHECK(rows[0].score == doctest::Approx(0.5));
  CHECK(rows[1].truth == 0);
  CHECK_THROWS_WITH_AS(scores_from_tsv("id\tscore\ttruth\na\t0.5\t2\n", "s.tsv"),
                       doctest::Contains("truth must be 0 or 1"), DataError);
  CHECK_THROWS_WITH_AS(scores_from_tsv("bad\n", "s.tsv"),
                       doctest::Contains("bad header"), DataError);
}

TEST_CASE("roc serialization pins the layout") {
  RocTable t;
  t.auc = 0.875;
  t.points = {{0, 0}, {0, 2}, {1, 3}, {4, 4}};
  std::string s = roc_to_tsv(t);
  CHECK(s ==
        "#auc\t0.875000\nfalse_positives\ttrue_positives\n0\t0\n0\t2\n1\t3\n4\t4\n");
}

TEST_CASE("atomic_write replaces content and cleans its temp file") {
  TempDir tmp;
  fs::path p = tmp.path / "out.txt";
  atomic_write(p, "first");
  CHECK(read_file(p) == "first");
  atomic_write(p, "second");
  CHECK(read_file(p) == "second");
  CHECK(!fs::exists(tmp.path / "out.txt.tmp"));
  CHECK_THROWS_AS(read_file(tmp.path / "missing.txt"), DataError);
  CHECK_THROWS_AS(atomic_write(tmp.path / "no_dir" / "x.txt", "y"), std::exception);
}

}  // TEST_SUITE
