#include "fedae/dataprep.hpp"
#include "fedae/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace fedae;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& contents, const std::string& name = "data.csv") {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() / ("fedae_dataprep_" + std::to_string(counter++) + "_" + name);
    std::ofstream(path, std::ios::binary) << contents;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

LabeledDataset blocks(std::size_t k, std::size_t per_class) {
  SynthSpec s;
  s.k = k;
  s.per_class_count = per_class;
  s.feature_count = 3;
  s.seed = 9;
  return synth_generate(s);
}

}  // namespace

TEST_SUITE("dataprep") {

TEST_CASE("load_csv basic file") {
  TempFile f("a,b,label\n1,2,0\n3,4,1\n5,6,1\n");
  const auto r = load_csv(f.path, std::string("label"));
  CHECK(r.dataset.rows() == 3);
  CHECK(r.dataset.feature_count() == 2);
  CHECK(r.dataset.labels == Labels{0, 1, 1});
  CHECK(r.dataset.k == 2);
  CHECK(r.dataset.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(r.dataset.features(2, 1) == 6.0);
  CHECK(r.dropped_rows == 0);

  const auto by_index = load_csv(f.path, std::size_t{2});
  CHECK(by_index.dataset.labels == Labels{0, 1, 1});
}

TEST_CASE("load_csv label encodings") {
  SUBCASE("string labels follow first appearance") {
    TempFile f("x,label\n1,benign\n2,attack\n3,benign\n");
    const auto r = load_csv(f.path, std::string("label"));
    CHECK(r.dataset.labels == Labels{0, 1, 0});
    CHECK(r.label_names == std::vector<std::string>{"benign", "attack"});
  }
  SUBCASE("integer labels keep numeric order") {
    TempFile f("x,label\n1,1\n2,0\n3,1\n");
    const auto r = load_csv(f.path, std::string("label"));
    CHECK(r.dataset.labels == Labels{1, 0, 1});
  }
  SUBCASE("label column in the middle") {
    TempFile f("x,label,y\n1,a,2\n3,b,4\n");
    const auto r = load_csv(f.path, std::size_t{1});
    CHECK(r.dataset.feature_names == std::vector<std::string>{"x", "y"});
    CHECK(r.dataset.features(1, 1) == 4.0);
  }
}

TEST_CASE("load_csv drops unusable rows") {
  TempFile f("a,b,label\n1,2,0\n1,NaN,1\n3,,1\n4,5\n\"6\",7,1\n8,inf,0\n9,x,0\n");
  const auto r = load_csv(f.path, std::string("label"));
  CHECK(r.dataset.rows() == 2);
  CHECK(r.dropped_rows == 5);
  CHECK(r.dataset.features.allFinite());
}

TEST_CASE("load_csv handles quoting and CRLF") {
  TempFile f("\"a,1\",b,label\r\n1.5,-2e3,\"x\"\r\n");
  const auto r = load_csv(f.path, std::string("label"));
  CHECK(r.dataset.feature_names[0] == "a,1");
  CHECK(r.dataset.features(0, 1) == -2000.0);
}

TEST_CASE("load_csv error kinds are distinct") {
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", std::string("label")), IoError);
  TempFile f("a,b\n1,2\n");
  CHECK_THROWS_WITH_AS(load_csv(f.path, std::string("label")), doctest::Contains("label column"), DataError);
  CHECK_THROWS_AS(load_csv(f.path, std::size_t{5}), DataError);
  TempFile empty("a,label\nx,1\n");
  CHECK_THROWS_WITH_AS(load_csv(empty.path, std::string("label")), doctest::Contains("no usable rows"), DataError);
}

TEST_CASE("parse_label_column") {
  CHECK(std::get<std::size_t>(parse_label_column("3")) == 3);
  CHECK(std::get<std::string>(parse_label_column("label")) == "label");
}

TEST_CASE("min-max scaling") {
  Matrix x(3, 2);
  x << 0, 7, 5, 7, 10, 7;
  const auto s = MinMaxScaler::fit(x);
  const Matrix y = s.apply(x);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(1, 0) == 0.5);
  CHECK(y(2, 0) == 1.0);
  CHECK(y.col(1).isZero(0.0));

  Matrix fit(2, 1);
  fit << 0, 10;
  Matrix unseen(1, 1);
  unseen << 20;
  CHECK(MinMaxScaler::fit(fit).apply(unseen)(0, 0) == 2.0);

  CHECK_THROWS_AS(s.apply(Matrix::Zero(2, 3)), ShapeError);
  CHECK_THROWS_AS(MinMaxScaler::fit(Matrix(0, 2)), InvalidArgument);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 50; ++t) {
    Matrix m(1 + t % 7, 1 + t % 5);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    const Matrix z = MinMaxScaler::fit(m).apply(m);
    CHECK(z.minCoeff() >= 0.0);
    CHECK(z.maxCoeff() <= 1.0);
  }
}

TEST_CASE("partition") {
  SUBCASE("binary sizes and block order") {
    const auto ds = blocks(2, 100);
    const auto p = partition(ds, {10, 0.8, 7});
    CHECK(p.test.rows() == 20);
    CHECK(p.train.rows() == 144);
    CHECK(p.validation.rows() == 36);
    for (std::size_t i = 0; i < 20; ++i) CHECK(p.test.labels[i] == (i < 10 ? 0 : 1));
  }
  SUBCASE("eleven classes at 1000 per class") {
    const auto ds = blocks(11, 1100);
    const auto p = partition(ds, {1000, 0.8, 42});
    CHECK(p.test.rows() == 11000);
  }
  SUBCASE("disjoint, exhaustive, deterministic") {
    const auto ds = blocks(4, 37);
    const auto a = partition(ds, {5, 0.8, 3});
    const auto b = partition(ds, {5, 0.8, 3});
    CHECK(a.train_rows == b.train_rows);
    CHECK(a.validation_rows == b.validation_rows);
    CHECK(a.test_rows == b.test_rows);
    std::set<std::size_t> all;
    for (const auto* v : {&a.train_rows, &a.validation_rows, &a.test_rows}) all.insert(v->begin(), v->end());
    CHECK(all.size() == ds.rows());
    CHECK(a.train_rows.size() + a.validation_rows.size() + a.test_rows.size() == ds.rows());
    // k contiguous equal runs, non-decreasing.
    for (std::size_t i = 0; i < a.test.rows(); ++i) CHECK(a.test.labels[i] == static_cast<int>(i / 5));
    const auto c = partition(ds, {5, 0.8, 4});
    CHECK(c.test_rows != a.test_rows);
  }
  SUBCASE("insufficient class names the class") {
    auto ds = blocks(3, 20);
    ds = ds.subset({0, 1, 2, 20, 21, 22, 23, 40, 41, 42, 43});
    CHECK_THROWS_WITH_AS(partition(ds, {4, 0.8, 1}), doctest::Contains("class 0"), DataError);
  }
}

TEST_CASE("synthetic generation") {
  SynthSpec s;
  s.k = 2;
  s.class_mean_separation = 10;
  s.noise_std = 0.1;
  s.per_class_count = 50;
  s.feature_count = 4;
  const auto ds = synth_generate(s);
  CHECK(ds.rows() == 100);
  CHECK(std::count(ds.labels.begin(), ds.labels.end(), 0) == 50);
  CHECK(std::count(ds.labels.begin(), ds.labels.end(), 1) == 50);
  const RowVector m0 = ds.features.topRows(50).colwise().mean();
  const RowVector m1 = ds.features.bottomRows(50).colwise().mean();
  CHECK((m1 - m0).norm() >= 50 * 0.1);
  CHECK(bitwise_equal(synth_generate(s).features, ds.features));

  s.k = 11;
  const auto many = synth_generate(s);
  for (int c = 0; c < 11; ++c) CHECK(std::count(many.labels.begin(), many.labels.end(), c) == 50);

  s.k = 1;
  CHECK_THROWS_AS(synth_generate(s), InvalidArgument);
}

TEST_CASE("write_csv round-trips through load_csv") {
  SynthSpec s;
  s.k = 3;
  s.per_class_count = 5;
  s.feature_count = 4;
  const auto ds = synth_generate(s);
  TempFile f("");
  write_csv(ds, f.path);
  const auto back = load_csv(f.path, std::string("label"));
  CHECK(bitwise_equal(back.dataset.features, ds.features));
  CHECK(back.dataset.labels == ds.labels);
  CHECK(back.dataset.feature_names == ds.feature_names);
}

}  // TEST_SUITE
