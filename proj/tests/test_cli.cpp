#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "paforge/params.hpp"
#include "support/pa_ref.hpp"

namespace fs = std::filesystem;
using namespace paforge;

namespace {

struct RunResult {
    int status;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    std::string cmd = env_prefix + " " + std::string(PAFORGE_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
    int rc = pclose(pipe);
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "paforge_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("compress reproduces the reference pipeline byte for byte") {
    fs::path dir = scratch_dir();
    const std::uint64_t gamma = 521, k = 8, r = 256, s = 100;
    PaParams pp = PaParams::from_prng(gamma, k, r, s, 99);

    std::mt19937_64 rng(1234);
    std::vector<LimbVec> blocks;
    for (std::uint64_t i = 0; i < k; ++i) blocks.push_back(oracles::random_block(rng, gamma));
    auto material = oracles::join_blocks(blocks, gamma);
    REQUIRE(material.size() == 521);  // 8 * 521 bits exactly

    write_bytes(dir / "seeds.bin", pp.to_seed_bytes());
    write_bytes(dir / "key.bin", material);

    std::string args = "compress --in " + (dir / "key.bin").string() + " --seed-file " +
                       (dir / "seeds.bin").string() + " --out " + (dir / "out.bin").string() +
                       " --gamma 521 --k 8 --r 256 --s 100";
    RunResult res = run_cli(args);
    INFO(res.output);
    CHECK(res.status == 0);
    CHECK(res.output.find("rejected_blocks: 0") != std::string::npos);

    BitVec expected = oracles::ref_compress(pp, blocks);
    CHECK(read_bytes(dir / "out.bin") == expected.bytes);

    // determinism: a second run produces identical bytes
    RunResult again = run_cli(args + " --radix 4");
    CHECK(again.status == 0);
    CHECK(read_bytes(dir / "out.bin") == expected.bytes);
}

TEST_CASE("compress reports reloaded blocks and honors the zero case") {
    fs::path dir = scratch_dir();
    const std::uint64_t gamma = 13, k = 2, r = 5, s = 2;
    PaParams base = PaParams::from_prng(gamma, k, r, s, 5);
    PaParams pp(gamma, k, r, s, base.a, base.b, LimbVec{});  // c = 0

    MersenneModulus m13(13);
    std::vector<LimbVec> fed{m13.value(), LimbVec::from_u64(7), LimbVec::from_u64(9)};
    write_bytes(dir / "rej.bin", oracles::join_blocks(fed, gamma));
    write_bytes(dir / "seeds13.bin", pp.to_seed_bytes());

    std::string args = "compress --in " + (dir / "rej.bin").string() + " --seed-file " +
                       (dir / "seeds13.bin").string() + " --out " + (dir / "rej_out.bin").string() +
                       " --gamma 13 --k 2 --r 5 --s 2";
    RunResult res = run_cli(args);
    INFO(res.output);
    CHECK(res.status == 0);
    CHECK(res.output.find("rejected_blocks: 1") != std::string::npos);
    CHECK(read_bytes(dir / "rej_out.bin") ==
          oracles::ref_compress(pp, {fed[1], fed[2]}).bytes);

    // zero-filled input with c = 0 gives a zero key file
    std::vector<std::uint8_t> zeros(4, 0);
    write_bytes(dir / "zeros.bin", zeros);
    res = run_cli("compress --in " + (dir / "zeros.bin").string() + " --seed-file " +
                  (dir / "seeds13.bin").string() + " --out " + (dir / "zero_out.bin").string() +
                  " --gamma 13 --k 2 --r 5 --s 2");
    CHECK(res.status == 0);
    CHECK(read_bytes(dir / "zero_out.bin") == std::vector<std::uint8_t>{0x00});
}

TEST_CASE("compress exit codes distinguish failure classes") {
    fs::path dir = scratch_dir();
    PaParams pp = PaParams::from_prng(521, 2, 100, 100, 7);
    write_bytes(dir / "seeds521.bin", pp.to_seed_bytes());
    std::vector<std::uint8_t> material(100, 0x55);  // 800 bits < 2 * 521
    write_bytes(dir / "mat.bin", material);

    // security condition: r >= gamma - s
    RunResult res = run_cli("compress --in " + (dir / "mat.bin").string() + " --seed-file " +
                            (dir / "seeds521.bin").string() + " --out " +
                            (dir / "x.bin").string() + " --gamma 521 --k 2 --r 421 --s 100");
    CHECK(res.status == 2);
    CHECK(res.output.find("security") != std::string::npos);

    // not enough key material: 200 bytes < 2 * 521 bits
    res = run_cli("compress --in " + (dir / "mat.bin").string() + " --seed-file " +
                  (dir / "seeds521.bin").string() + " --out " + (dir / "x.bin").string() +
                  " --gamma 521 --k 2 --r 100 --s 100");
    CHECK(res.status == 3);

    // missing input file
    res = run_cli("compress --in " + (dir / "nope.bin").string() + " --seed-file " +
                  (dir / "seeds521.bin").string() + " --out " + (dir / "x.bin").string() +
                  " --gamma 521 --k 2 --r 100 --s 100");
    CHECK(res.status == 4);

    // malformed seed file size
    write_bytes(dir / "short_seeds.bin", std::vector<std::uint8_t>(10, 1));
    res = run_cli("compress --in " + (dir / "mat.bin").string() + " --seed-file " +
                  (dir / "short_seeds.bin").string() + " --out " + (dir / "x.bin").string() +
                  " --gamma 521 --k 2 --r 100 --s 100");
    CHECK(res.status == 2);
}

TEST_CASE("keyrate emits the stable CSV schema") {
    fs::path dir = scratch_dir();
    {
        std::ofstream csv(dir / "curve.csv");
        csv << "distance_km,r_pa,sifted_rate_bps\n10,0.3,1e6\n50,0.1,2e5\n90,-0.02,100\n";
    }
    RunResult res = run_cli("keyrate --in " + (dir / "curve.csv").string() + " --gamma 756839");
    INFO(res.output);
    CHECK(res.status == 0);
    CHECK(res.output ==
          "distance_km,k,N_bits,final_rate_bps\n"
          "10,3,2270517,300000\n"
          "50,9,6811551,20000\n"
          "90,0,0,0\n");

    // --out writes the same table to a file
    res = run_cli("keyrate --in " + (dir / "curve.csv").string() + " --gamma 756839 --out " +
                  (dir / "rates.csv").string());
    CHECK(res.status == 0);
    std::ifstream in(dir / "rates.csv");
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    CHECK(contents.find("distance_km,k,N_bits,final_rate_bps\n") == 0);

    {
        std::ofstream csv(dir / "bad.csv");
        csv << "km,ratio,rate\n10,0.3,1e6\n";
    }
    res = run_cli("keyrate --in " + (dir / "bad.csv").string() + " --gamma 756839");
    CHECK(res.status == 2);
}

TEST_CASE("bench reports a positive median throughput") {
    RunResult res = run_cli("bench --gamma 521 --k 4 --trials 3 --seed 42");
    INFO(res.output);
    CHECK(res.status == 0);
    REQUIRE(res.output.find(
                "gamma,k,radix,threads,trials,input_bits,median_seconds,throughput_mbps\n") !=
            std::string::npos);
    std::uint64_t g = 0, k = 0, bits = 0;
    unsigned radix = 0, threads = 0, trials = 0;
    double secs = 0, mbps = 0;
    auto row = res.output.substr(res.output.find('\n') + 1);
    REQUIRE(std::sscanf(row.c_str(), "%llu,%llu,%u,%u,%u,%llu,%lf,%lf",
                        reinterpret_cast<unsigned long long*>(&g),
                        reinterpret_cast<unsigned long long*>(&k), &radix, &threads, &trials,
                        reinterpret_cast<unsigned long long*>(&bits), &secs, &mbps) == 8);
    CHECK(g == 521);
    CHECK(bits == 4 * 521);
    CHECK(radix == 16);
    CHECK(mbps > 0.0);

    // radix dial and thread fan-out are accepted
    res = run_cli("bench --gamma 521 --k 4 --trials 1 --radix 2 --threads 2 --seed 42");
    CHECK(res.status == 0);
    // invalid radix is rejected at parse time
    res = run_cli("bench --gamma 521 --k 4 --radix 3");
    CHECK(res.status != 0);

    // production-shape row: N = 3 * 756839
    res = run_cli("bench --gamma 756839 --k 3 --trials 1 --seed 7");
    INFO(res.output);
    CHECK(res.status == 0);
    CHECK(res.output.find(",2270517,") != std::string::npos);
}

TEST_CASE("selftest passes and the fault hook trips it") {
    RunResult res = run_cli("selftest");
    INFO(res.output);
    CHECK(res.status == 0);
    CHECK(res.output.find("selftest passed") != std::string::npos);
    CHECK(res.output.find("[FAIL]") == std::string::npos);

    RunResult again = run_cli("selftest");
    CHECK(again.output == res.output);  // deterministic verdicts

    res = run_cli("selftest --inject-fault");
    CHECK(res.status != 0);
    CHECK(res.output.find("[FAIL]") != std::string::npos);
}

TEST_CASE("plan cache round-trips through PA_FORGE_PLAN_CACHE") {
    fs::path dir = scratch_dir();
    fs::path cache = dir / "plan_cache";
    std::string env = "PA_FORGE_PLAN_CACHE=" + cache.string();

    PaParams pp = PaParams::from_prng(521, 2, 100, 100, 11);
    write_bytes(dir / "cache_seeds.bin", pp.to_seed_bytes());
    std::mt19937_64 rng(77);
    std::vector<LimbVec> blocks{oracles::random_block(rng, 521), oracles::random_block(rng, 521)};
    write_bytes(dir / "cache_mat.bin", oracles::join_blocks(blocks, 521));

    std::string args = "compress --in " + (dir / "cache_mat.bin").string() + " --seed-file " +
                       (dir / "cache_seeds.bin").string() + " --out " +
                       (dir / "cache_out.bin").string() + " --gamma 521 --k 2 --r 100 --s 100";
    RunResult res = run_cli(args, env);
    INFO(res.output);
    CHECK(res.status == 0);
    CHECK(fs::exists(cache / "plan_64_r16.bin"));
    auto first = read_bytes(dir / "cache_out.bin");

    // warm cache run gives identical output
    res = run_cli(args, env);
    CHECK(res.status == 0);
    CHECK(read_bytes(dir / "cache_out.bin") == first);

    // a corrupted cache entry is ignored, not trusted
    {
        std::ofstream f(cache / "plan_64_r16.bin", std::ios::binary | std::ios::trunc);
        f << "garbage";
    }
    res = run_cli(args, env);
    CHECK(res.status == 0);
    CHECK(read_bytes(dir / "cache_out.bin") == first);
}
