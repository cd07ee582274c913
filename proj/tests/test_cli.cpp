#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "cli_runner.hpp"
#include "prforge/measurement_io.hpp"
#include "prforge/png_io.hpp"

using namespace prforge;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    static const fs::path dir = [] {
        const auto d = fs::temp_directory_path() / "prforge_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        const ImageReal full = read_png(PRFORGE_TEST_DATA "/natural32/02_coins.png");
        ImageReal crop(16, 16);
        for (std::size_t r = 0; r < 16; ++r)
            for (std::size_t c = 0; c < 16; ++c) crop(r, c) = full(r + 8, c + 8);
        write_png(d / "truth.png", crop);
        std::ofstream(d / "fast.cfg") << "T = 3\nK = 2\nnum_starts = 3\nshort_iters = 5\nlong_iters = 20\n";
        return d;
    }();
    return dir;
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST_CASE("simulate", "[cli]") {
    auto r = cli::run({"simulate", "--input", p("truth.png"), "--alpha", "0", "--seed", "1", "--out", p("clean.prm")});
    REQUIRE(r.code == 0);
    CHECK(r.out == "snr_db,inf\n");
    const ImageReal truth = read_png(p("truth.png"));
    const FourierOp op(16, 16);
    CHECK(residual(op, truth, load_measurement(p("clean.prm"))) == 0.0);

    REQUIRE(cli::run({"simulate", "--input", p("truth.png"), "--alpha", "3", "--seed", "9", "--out", p("a.prm")}).code == 0);
    REQUIRE(cli::run({"simulate", "--input", p("truth.png"), "--alpha", "3", "--seed", "9", "--out", p("b.prm")}).code == 0);
    CHECK(cli::slurp(p("a.prm")) == cli::slurp(p("b.prm")));

    r = cli::run({"simulate", "--input", p("nope.png"), "--out", p("x.prm")});
    CHECK(r.code == 2);
    CHECK(r.err.find(p("nope.png")) != std::string::npos);
}

TEST_CASE("usage and runtime errors", "[cli]") {
    REQUIRE(cli::run({"simulate", "--input", p("truth.png"), "--alpha", "2", "--seed", "1", "--out", p("m.prm")}).code == 0);
    auto r = cli::run({"reconstruct", "--measurement", p("m.prm"), "--method", "gs", "--out", p("o.png")});
    CHECK(r.code == 2);
    CHECK(r.err.find("prnet-small") != std::string::npos);

    std::ofstream(p("bad.cfg")) << "T = 3\ncolour = red\n";
    r = cli::run({"reconstruct", "--measurement", p("m.prm"), "--config", p("bad.cfg"), "--out", p("o.png")});
    CHECK(r.code == 2);
    CHECK(r.err.find("colour") != std::string::npos);

    std::ofstream(p("cnn.cfg")) << "denoiser = cnn\n";
    r = cli::run({"reconstruct", "--measurement", p("m.prm"), "--config", p("cnn.cfg"), "--out", p("o.png")});
    CHECK(r.code == 2);
    CHECK(r.err.find("weights") != std::string::npos);

    r = cli::run({"reconstruct", "--measurement", p("missing.prm"), "--out", p("o.png")});
    CHECK(r.code == 2);
    CHECK(r.err.find(p("missing.prm")) != std::string::npos);

    CHECK(cli::run({"reconstruct"}).code == 2);
    CHECK(cli::run({"frobnicate"}).code == 2);

    std::ofstream(p("garbage.prm")) << "definitely not a measurement";
    r = cli::run({"reconstruct", "--measurement", p("garbage.prm"), "--method", "hio", "--out", p("o.png")});
    CHECK(r.code == 1);

    const ImageReal truth = read_png(p("truth.png"));
    write_png(p("small.png"), ImageReal(12, 12));
    CHECK(cli::run({"evaluate", "--recon", p("small.png"), "--truth", p("truth.png")}).code == 2);
}

TEST_CASE("evaluate output format", "[cli]") {
    auto r = cli::run({"evaluate", "--recon", p("truth.png"), "--truth", p("truth.png")});
    REQUIRE(r.code == 0);
    CHECK(r.out == "inf,1.0,false\n");

    write_png(p("rot.png"), apply_d4(read_png(p("truth.png")), D4Transform::R180));
    r = cli::run({"evaluate", "--recon", p("rot.png"), "--truth", p("truth.png")});
    REQUIRE(r.code == 0);
    CHECK(r.out == "inf,1.0,true\n");

    r = cli::run({"evaluate", "--recon", p("rot.png"), "--truth", p("truth.png"), "--no-flip-resolve"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("inf", 0) == std::string::npos);
    CHECK(std::stod(r.out.substr(0, r.out.find(','))) < 1e300);
    CHECK(r.out.find(",false") != std::string::npos);
}

TEST_CASE("reconstruct methods", "[cli]") {
    REQUIRE(cli::run({"simulate", "--input", p("truth.png"), "--alpha", "3", "--seed", "5", "--out", p("r.prm")}).code == 0);
    const std::vector<std::string> base{"reconstruct", "--measurement", p("r.prm"), "--config", p("fast.cfg"), "--seed", "17"};

    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return cli::run(args);
    };
    REQUIRE(with({"--method", "init", "--out", p("init.png"), "--dump-init", p("init.bin")}).code == 0);
    REQUIRE(with({"--method", "prnet-small", "--out", p("small.png"), "--dump-init", p("small.bin")}).code == 0);
    CHECK(cli::slurp(p("init.bin")) == cli::slurp(p("small.bin")));
    CHECK(cli::slurp(p("init.bin")).size() == 16 * 16 * 8);

    REQUIRE(with({"--method", "hio", "--out", p("hio.png")}).code == 0);
    CHECK(read_png(p("hio.png")).height() == 16);

    std::ofstream(p("large.cfg")) << "T = 3\nK = 2\nnum_starts = 4\nshort_iters = 5\nlong_iters = 20\nchains = 3\n";
    auto r = cli::run({"reconstruct", "--measurement", p("r.prm"), "--config", p("large.cfg"), "--method", "prnet-large",
                       "--tta", "d4", "--out", p("large.png"), "--trace", p("large.csv"), "--truth", p("truth.png")});
    REQUIRE(r.code == 0);
    std::istringstream trace(cli::slurp(p("large.csv")));
    std::string line;
    std::getline(trace, line);
    CHECK(line == "branch,chain,iteration,residual,psnr_db");
    std::set<std::pair<std::string, std::string>> pairs;
    std::size_t rows = 0;
    while (std::getline(trace, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        pairs.emplace(line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1));
        CHECK(line.back() != ',');
        ++rows;
    }
    CHECK(pairs.size() == 8 * 3);
    CHECK(rows == 8 * 3 * 3);

    REQUIRE(cli::run({"weights", "--init", "zero", "--lambda-steps", "3", "--out", p("zero.prwt")}).code == 0);
    std::ofstream(p("cnn3.cfg")) << "T = 3\nK = 2\nnum_starts = 3\nshort_iters = 5\nlong_iters = 20\ndenoiser = cnn\n";
    r = cli::run({"reconstruct", "--measurement", p("r.prm"), "--config", p("cnn3.cfg"), "--weights", p("zero.prwt"),
                  "--out", p("cnn.png")});
    CHECK(r.code == 0);
}

TEST_CASE("results do not depend on the worker count", "[cli][determinism]") {
    REQUIRE(cli::run({"simulate", "--input", p("truth.png"), "--alpha", "3", "--seed", "8", "--out", p("w.prm")}).code == 0);
    std::ofstream(p("large.cfg")) << "T = 3\nK = 2\nnum_starts = 4\nshort_iters = 5\nlong_iters = 20\nchains = 3\n";
    auto bad = cli::run({"reconstruct", "--measurement", p("w.prm"), "--config", p("fast.cfg"), "--method",
                         "prnet-large", "--out", p("bad.png")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("keep") != std::string::npos);

    std::vector<std::string> outputs;
    for (const char* w : {"1", "4", "1"}) {
        const std::string tag = std::string("w") + w + std::to_string(outputs.size());
        auto r = cli::run({"reconstruct", "--measurement", p("w.prm"), "--config", p("large.cfg"), "--method",
                           "prnet-large", "--tta", "flip", "--seed", "3", "--workers", w, "--out", p(tag + ".png"),
                           "--trace", p(tag + ".csv")});
        REQUIRE(r.code == 0);
        outputs.push_back(cli::slurp(p(tag + ".png")) + cli::slurp(p(tag + ".csv")) + r.out);
    }
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);

    auto env = cli::run({"reconstruct", "--measurement", p("w.prm"), "--config", p("large.cfg"), "--method", "prnet-large",
                         "--tta", "flip", "--seed", "3", "--out", p("env.png")},
                        "PRFORGE_WORKERS=3");
    REQUIRE(env.code == 0);
    CHECK(cli::slurp(p("env.png")) == cli::slurp(p("w10.png")));
}

TEST_CASE("benchmark subcommand", "[cli][benchmark]") {
    const auto dir = workdir() / "bench";
    fs::create_directories(dir);
    fs::copy_file(p("truth.png"), dir / "t.png", fs::copy_options::overwrite_existing);
    auto r = cli::run({"benchmark", "--dir", dir.string(), "--alphas", "2,3", "--runs", "1", "--methods", "hio",
                       "--config", p("fast.cfg"), "--out", p("bench.csv")});
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(p("bench.summary.csv")));
    CHECK(fs::exists(p("bench.hist.csv")));
    std::istringstream rows(cli::slurp(p("bench.csv")));
    std::string line;
    std::size_t n = 0;
    while (std::getline(rows, line)) ++n;
    CHECK(n == 3);

    std::ofstream(dir / "broken.png") << "xx";
    r = cli::run({"benchmark", "--dir", dir.string(), "--alphas", "2", "--runs", "1", "--methods", "hio", "--config",
                  p("fast.cfg"), "--out", p("bench2.csv")});
    CHECK(r.code == 1);
    CHECK(r.err.find("broken.png") != std::string::npos);
}
