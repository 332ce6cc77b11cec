#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <vector>

#include "vin/dataset.hpp"
#include "vin/errors.hpp"

using namespace vin;

namespace {

std::filesystem::path write_temp_csv(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream f(path, std::ios::trunc);
    f << content;
    return path;
}

Dataset make_dataset(std::size_t rows) {
    Dataset ds;
    std::vector<double> a(rows);
    std::vector<double> b(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        a[i] = static_cast<double>(i);
        b[i] = static_cast<double>(i) * 0.5 - 3.0;
    }
    ds.add_column("a", std::move(a));
    ds.add_column("b", std::move(b));
    return ds;
}

} // namespace

TEST_CASE("load_csv transcribes a small table") {
    const auto path = write_temp_csv("vin_small.csv", "a,b\n1,2\n3,4\n");
    const Dataset ds = load_csv(path);
    CHECK(ds.row_count() == 2);
    CHECK(ds.column("a")[0] == 1.0);
    CHECK(ds.column("a")[1] == 3.0);
    CHECK(ds.column("b")[0] == 2.0);
    CHECK(ds.column("b")[1] == 4.0);
}

TEST_CASE("load_csv rejects duplicate headers, ragged rows and non-finite cells") {
    CHECK_THROWS_AS(load_csv(write_temp_csv("vin_dup.csv", "a,a\n1,2\n")), DataError);
    CHECK_THROWS_AS(load_csv(write_temp_csv("vin_ragged.csv", "a,b\n1\n")), DataError);
    CHECK_THROWS_AS(load_csv(write_temp_csv("vin_nan.csv", "a,b\n1,nan\n")), DataError);
    CHECK_THROWS_AS(load_csv(write_temp_csv("vin_inf.csv", "a,b\n1,inf\n")), DataError);
    CHECK_THROWS_AS(load_csv(write_temp_csv("vin_text.csv", "a,b\n1,x\n")), DataError);
    // a header-only file is a valid zero-row table
    CHECK(load_csv(write_temp_csv("vin_empty.csv", "a,b\n")).row_count() == 0);
    // missing file
    CHECK_THROWS_AS(load_csv("/nonexistent/vin.csv"), DataError);
    // the error message carries the file position
    try {
        load_csv(write_temp_csv("vin_pos.csv", "a,b\n1,2\n3,oops\n"));
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":3") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
    }
}

TEST_CASE("csv round trip preserves values exactly") {
    Dataset ds;
    ds.add_column("x", {0.1, 1.0 / 3.0, -2.5e-17, 123456.789});
    ds.add_column("y", {1.0, 2.0, 3.0, 4.0});
    const auto path = std::filesystem::temp_directory_path() / "vin_roundtrip.csv";
    save_csv(ds, path);
    const Dataset back = load_csv(path);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(back.column("x")[i] == ds.column("x")[i]);
        CHECK(back.column("y")[i] == ds.column("y")[i]);
    }
}

TEST_CASE("split is chronological and floor-based") {
    SUBCASE("1000 rows at 0.66") {
        const auto [train, test] = split(make_dataset(1000), 0.66);
        CHECK(train.row_count() == 660);
        CHECK(test.row_count() == 340);
    }
    SUBCASE("2 rows at 0.66") {
        const auto [train, test] = split(make_dataset(2), 0.66);
        CHECK(train.row_count() == 1);
        CHECK(test.row_count() == 1);
    }
    SUBCASE("10 rows at 0.5 preserves order") {
        const auto [train, test] = split(make_dataset(10), 0.5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(train.column("a")[i] == static_cast<double>(i));
            CHECK(test.column("a")[i] == static_cast<double>(i + 5));
        }
    }
    CHECK_THROWS_AS(split(make_dataset(10), 0.0), DataError);
    CHECK_THROWS_AS(split(make_dataset(10), 1.0), DataError);
}

TEST_CASE("split followed by concatenation reproduces the dataset") {
    const Dataset ds = make_dataset(37);
    const auto [train, test] = split(ds, 0.66);
    for (const auto& name : ds.names()) {
        const auto original = ds.column(name);
        const auto head = train.column(name);
        const auto tail = test.column(name);
        REQUIRE(head.size() + tail.size() == original.size());
        for (std::size_t i = 0; i < head.size(); ++i) {
            CHECK(head[i] == original[i]);
        }
        for (std::size_t i = 0; i < tail.size(); ++i) {
            CHECK(tail[i] == original[head.size() + i]);
        }
    }
}

TEST_CASE("permute_column changes only the named column and keeps the multiset") {
    const Dataset ds = make_dataset(100);
    const Dataset shuffled = permute_column(ds, "a", 42);

    // untouched column is bit-identical
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(shuffled.column("b")[i] == ds.column("b")[i]);
    }

    std::vector<double> original(ds.column("a").begin(), ds.column("a").end());
    std::vector<double> permuted(shuffled.column("a").begin(), shuffled.column("a").end());
    CHECK(original != permuted);  // 100 elements, astronomically unlikely to be identity
    std::sort(permuted.begin(), permuted.end());
    CHECK(original == permuted);  // already sorted ascending by construction

    SUBCASE("fixed seed reproduces the permutation") {
        const Dataset again = permute_column(ds, "a", 42);
        for (std::size_t i = 0; i < 100; ++i) {
            CHECK(again.column("a")[i] == shuffled.column("a")[i]);
        }
    }
    SUBCASE("single row is a no-op") {
        Dataset one;
        one.add_column("a", {5.0});
        const Dataset out = permute_column(one, "a", 9);
        CHECK(out.column("a")[0] == 5.0);
    }
    CHECK_THROWS_AS(permute_column(ds, "nope", 1), DataError);
}

TEST_CASE("add_derivatives matches difference formulas") {
    const std::vector<std::string> vars{"x"};

    SUBCASE("linear sequence: d1 constant, d2 zero") {
        Dataset ds;
        ds.add_column("x", {0, 1, 2, 3});
        const Dataset out = add_derivatives(ds, vars, 1.0);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(out.column("d1_x")[i] == doctest::Approx(1.0));
            CHECK(out.column("d2_x")[i] == doctest::Approx(0.0));
        }
        CHECK(out.column_count() == 3);
    }
    SUBCASE("quadratic sequence: interior d2 = 2") {
        Dataset ds;
        ds.add_column("x", {0, 1, 4, 9});
        const Dataset out = add_derivatives(ds, vars, 1.0);
        CHECK(out.column("d2_x")[1] == doctest::Approx(2.0));
        CHECK(out.column("d2_x")[2] == doctest::Approx(2.0));
    }
    SUBCASE("constant column: both derivatives zero") {
        Dataset ds;
        ds.add_column("x", {7, 7, 7, 7, 7});
        const Dataset out = add_derivatives(ds, vars, 0.5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(out.column("d1_x")[i] == 0.0);
            CHECK(out.column("d2_x")[i] == 0.0);
        }
    }
    SUBCASE("affine function of t: interior d1 = slope to machine precision") {
        Dataset ds;
        std::vector<double> x(50);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = 2.25 * static_cast<double>(i) * 0.1 - 0.5;
        }
        ds.add_column("x", std::move(x));
        const Dataset out = add_derivatives(ds, vars, 0.1);
        for (std::size_t i = 1; i + 1 < 50; ++i) {
            CHECK(out.column("d1_x")[i] == doctest::Approx(2.25).epsilon(1e-12));
            CHECK(out.column("d2_x")[i] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        }
    }

    Dataset tiny;
    tiny.add_column("x", {1.0, 2.0});
    CHECK_THROWS_AS(add_derivatives(tiny, vars, 1.0), DataError);
    Dataset ok = make_dataset(5);
    const std::vector<std::string> unknown{"zz"};
    CHECK_THROWS_AS(add_derivatives(ok, unknown, 1.0), DataError);
}

TEST_CASE("windows enumerate exactly the fitting starts") {
    SUBCASE("1000 rows, size 100, step 100: ten disjoint windows") {
        const auto w = windows(make_dataset(1000), {100, 100});
        CHECK(w.size() == 10);
    }
    SUBCASE("1000 rows, size 200, step 50: starts 0..800") {
        const auto w = windows(make_dataset(1000), {200, 50});
        REQUIRE(w.size() == 17);
        CHECK(w.front().first == 0);
        CHECK(w.back().first == 800);
    }
    SUBCASE("size equal to row count: a single full copy") {
        const Dataset ds = make_dataset(50);
        const auto w = windows(ds, {50, 10});
        REQUIRE(w.size() == 1);
        CHECK(w[0].first == 0);
        CHECK(w[0].second.row_count() == 50);
        for (std::size_t i = 0; i < 50; ++i) {
            CHECK(w[0].second.column("a")[i] == ds.column("a")[i]);
        }
    }
    SUBCASE("start coverage: every start with s mod step == 0 and s+size <= rows, once") {
        const Dataset ds = make_dataset(103);
        const WindowSpec spec{20, 7};
        const auto w = windows(ds, spec);
        std::vector<std::size_t> starts;
        for (std::size_t s = 0; s + spec.size <= ds.row_count(); s += spec.step) {
            starts.push_back(s);
        }
        REQUIRE(w.size() == starts.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(w[i].first == starts[i]);
        }
    }
    CHECK_THROWS_AS(windows(make_dataset(10), {20, 5}), DataError);
    CHECK_THROWS_AS(windows(make_dataset(10), {5, 6}), DataError);
    CHECK_THROWS_AS(windows(make_dataset(10), {1, 1}), DataError);
}

TEST_CASE("hidden flags survive select, slice and with_column") {
    Dataset ds = make_dataset(10);
    ds.set_hidden("b", true);
    CHECK(ds.visible_names() == std::vector<std::string>{"a"});

    const std::vector<std::string> order{"b", "a"};
    const Dataset reordered = ds.select(order);
    CHECK(reordered.hidden("b"));
    CHECK_FALSE(reordered.hidden("a"));

    const Dataset sliced = ds.slice(2, 5);
    CHECK(sliced.hidden("b"));
    CHECK(sliced.row_count() == 5);

    const Dataset replaced = ds.with_column("a", std::vector<double>(10, 1.0));
    CHECK(replaced.hidden("b"));
    CHECK(replaced.column("a")[3] == 1.0);
    CHECK(ds.column("a")[3] == 3.0);  // original untouched
}
