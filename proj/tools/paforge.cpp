// paforge: MMH-MH privacy amplification over Mersenne-prime fields with
// NTT big-number multiplication. Subcommands: compress, bench, keyrate,
// selftest.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "paforge/bignum.hpp"
#include "paforge/field.hpp"
#include "paforge/ntt.hpp"
#include "paforge/pa.hpp"
#include "paforge/params.hpp"
#include "paforge/plan_cache.hpp"

namespace {

// Exit codes: 0 success, 2 parameter/invariant violation, 3 insufficient
// key material, 4 file I/O failure, 1 selftest failure.
constexpr int kExitOk = 0;
constexpr int kExitSelftest = 1;
constexpr int kExitParam = 2;
constexpr int kExitMaterial = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read error on '" + path + "'");
    return data;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write error on '" + path + "'");
}

paforge::NttPlan plan_for_gamma(std::uint64_t gamma, unsigned radix) {
    std::size_t size = paforge::plan_size_for_gamma(gamma);
    if (size > paforge::kMaxNttSize)
        throw std::invalid_argument(
            "gamma exceeds the capacity of the 65536-point multiplier");
    return paforge::make_plan_cached(size, radix);
}

// ---- compress ----

int cmd_compress(const std::string& in_path, const std::string& seed_path,
                 const std::string& out_path, std::uint64_t gamma, std::uint64_t k,
                 std::uint64_t r, std::uint64_t s, unsigned radix) {
    auto seeds = read_file(seed_path);
    paforge::PaParams params = paforge::PaParams::from_seed_bytes(seeds, gamma, k, r, s);
    auto material = read_file(in_path);
    paforge::NttPlan plan = plan_for_gamma(gamma, radix);

    paforge::CompressResult res = paforge::compress(params, material, plan);
    write_file(out_path, res.key.bytes);
    std::cout << "rejected_blocks: " << res.rejected_blocks << "\n";
    return kExitOk;
}

// ---- bench ----

struct BenchReport {
    std::uint64_t input_bits;  // k * gamma per session
    double wall_time;          // median seconds per trial
    double throughput_mbps;    // threads * input_bits / wall_time / 1e6
    std::uint64_t gamma, k;
    unsigned radix, threads, trials;
};

constexpr const char* kBenchCsvHeader =
    "gamma,k,radix,threads,trials,input_bits,median_seconds,throughput_mbps";

BenchReport run_bench(std::uint64_t gamma, std::uint64_t k, unsigned radix, unsigned trials,
                      unsigned threads, std::uint64_t seed) {
    paforge::NttPlan plan = plan_for_gamma(gamma, radix);
    std::uint64_t s = std::min<std::uint64_t>(100, gamma / 4);
    std::uint64_t r = (gamma - s) / 2 + 1;
    paforge::PaParams params = paforge::PaParams::from_prng(gamma, k, r, s, seed);

    // material carries four spare blocks per session for reloads
    const std::size_t bytes_per_session =
        static_cast<std::size_t>(((k + 4) * gamma + 7) / 8);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<double> times;
    for (unsigned trial = 0; trial < trials; ++trial) {
        std::vector<std::vector<std::uint8_t>> material(threads);
        for (auto& m : material) {
            m.resize(bytes_per_session);
            for (auto& b : m) b = static_cast<std::uint8_t>(rng());
        }
        auto run_one = [&](unsigned t) { (void)paforge::compress(params, material[t], plan); };

        auto start = std::chrono::steady_clock::now();
        if (threads == 1) {
            run_one(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run_one, t);
            for (auto& th : pool) th.join();
        }
        auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    double median = times[(times.size() - 1) / 2];

    BenchReport rep{};
    rep.input_bits = gamma * k;
    rep.wall_time = median;
    rep.throughput_mbps =
        static_cast<double>(rep.input_bits) * threads / median / 1e6;
    rep.gamma = gamma;
    rep.k = k;
    rep.radix = radix;
    rep.threads = threads;
    rep.trials = trials;
    return rep;
}

int cmd_bench(std::uint64_t gamma, std::uint64_t k, unsigned radix, unsigned trials,
              unsigned threads, std::uint64_t seed) {
    BenchReport rep = run_bench(gamma, k, radix, trials, threads, seed);
    std::cout << kBenchCsvHeader << "\n"
              << rep.gamma << ',' << rep.k << ',' << rep.radix << ',' << rep.threads << ','
              << rep.trials << ',' << rep.input_bits << ',' << rep.wall_time << ','
              << rep.throughput_mbps << "\n";
    return kExitOk;
}

// ---- keyrate ----

int cmd_keyrate(const std::string& in_path, std::uint32_t gamma, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw IoError("cannot open '" + in_path + "' for reading");
    auto curve = paforge::parse_rate_curve_csv(in);
    auto rows = paforge::tabulate_keyrate(curve, gamma);
    if (out_path.empty()) {
        paforge::write_keyrate_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + out_path + "' for writing");
        paforge::write_keyrate_csv(out, rows);
        if (!out) throw IoError("write error on '" + out_path + "'");
    }
    return kExitOk;
}

// ---- selftest ----

// Definitional O(N^2) transform, local to the selftest.
paforge::NttVector dft_definition(const paforge::NttVector& x) {
    using paforge::FieldElem;
    const std::size_t n = x.size();
    unsigned log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    FieldElem w = paforge::root_of_order_pow2(log2n);
    paforge::NttVector out(n);
    for (std::size_t k = 0; k < n; ++k) {
        FieldElem acc{0};
        for (std::size_t i = 0; i < n; ++i)
            acc = add(acc, mul(x[i], paforge::pow(w, static_cast<std::uint64_t>(i) * k % n)));
        out[k] = acc;
    }
    return out;
}

int cmd_selftest(bool inject_fault, unsigned radix) {
    using namespace paforge;
    bool all_ok = true;
    auto report = [&](const char* name, bool ok) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
        all_ok = all_ok && ok;
    };
    std::mt19937_64 rng(0x5eedu);

    {
        FieldElem w{kRoot65536};
        report("root-of-unity: W^65536 == 1, W^32768 == p-1",
               pow(w, 65536) == FieldElem{1} &&
                   pow(w, 32768) == FieldElem{kFieldPrime - 1} &&
                   pow(w, 16384) != FieldElem{1});
    }
    {
        bool ok = true;
        for (int i = 0; i < 20000 && ok; ++i) {
            std::uint64_t a = rng() % kFieldPrime, b = rng() % kFieldPrime;
            unsigned __int128 ref = static_cast<unsigned __int128>(a) * b % kFieldPrime;
            ok = mul(FieldElem{a}, FieldElem{b}).v == static_cast<std::uint64_t>(ref);
        }
        report("field multiplication vs 128-bit reference", ok);
    }
    {
        NttPlan plan = make_plan(16, radix);
        bool ok = true;
        for (int i = 0; i < 8 && ok; ++i) {
            NttVector v(16);
            for (auto& e : v) e = FieldElem{rng() % kFieldPrime};
            ok = forward(plan, v) == dft_definition(v);
        }
        NttPlan plan256 = make_plan(256, radix);
        if (inject_fault) plan256.twiddles[1].v ^= 1;  // negative-control hook
        for (int i = 0; i < 4 && ok; ++i) {
            NttVector v(256);
            for (auto& e : v) e = FieldElem{rng() % kFieldPrime};
            ok = inverse(plan256, forward(plan256, v)) == v;
        }
        report("NTT vs definitional transform, roundtrip", ok);
    }
    {
        bool ok = true;
        NttPlan p8 = make_plan(8, radix), p128 = make_plan(128, radix);
        for (int i = 0; i < 50 && ok; ++i) {
            LimbVec a, b;
            a.limbs = {static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask,
                       static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask,
                       static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask,
                       static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask};
            b.limbs = a.limbs;
            for (auto& l : b.limbs) l = static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask;
            ok = compare(mul_ntt(a, b, p8), mul_schoolbook(a, b)) == 0;
            if (ok) {
                LimbVec c, d;
                c.limbs.assign(64, 0);
                d.limbs.assign(64, 0);
                for (auto& l : c.limbs) l = static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask;
                for (auto& l : d.limbs) l = static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask;
                ok = compare(mul_ntt(c, d, p128), mul_schoolbook(c, d)) == 0;
            }
        }
        report("NTT multiplication vs schoolbook oracle", ok);
    }
    {
        MersenneModulus m521(521);
        bool ok = mersenne_reduce(m521.value(), m521).is_zero();
        ok = ok && mersenne_reduce(shift_left_bits(LimbVec::from_u64(1), 521), m521)
                           .value_u64() == 1;
        ok = ok && mersenne_reduce(add(shift_left_bits(LimbVec::from_u64(1), 521),
                                       LimbVec::from_u64(5)),
                                   m521)
                           .value_u64() == 6;
        LimbVec nearly = m521.value();
        nearly.limbs[0] -= 1;
        ModAccumulator acc(m521, nearly);
        acc.accumulate(LimbVec::from_u64(1));
        ok = ok && acc.value().is_zero() && equals_all_ones(acc.raw(), 521);
        report("Mersenne folding and accumulator wrap", ok);
    }
    {
        NttPlan plan = make_plan(2, 2);
        bool ok = true;
        std::vector<std::vector<std::uint64_t>> g(31, std::vector<std::uint64_t>(31));
        for (std::uint64_t a = 0; a < 31 && ok; ++a) {
            PaParams pp(5, 1, 2, 1, {LimbVec::from_u64(a)}, LimbVec::from_u64(1), LimbVec{});
            for (std::uint64_t x = 0; x < 31; ++x)
                g[a][x] = mmh(pp, {LimbVec::from_u64(x)}, plan).value_u64();
        }
        for (std::uint64_t x = 0; x < 31 && ok; ++x)
            for (std::uint64_t xp = x + 1; xp < 31 && ok; ++xp) {
                unsigned coll = 0;
                for (std::uint64_t a = 0; a < 31; ++a)
                    if (g[a][x] == g[a][xp]) ++coll;
                ok = coll <= 1;  // collision fraction <= 1/31
            }
        report("MMH universality, exhaustive at gamma=5", ok);
    }
    {
        bool ok = true;
        for (int i = 0; i < 2000 && ok; ++i) {
            std::uint64_t alpha = 2 + rng() % 400;
            std::uint64_t beta = 1 + rng() % (alpha - 1);
            LimbVec v;
            v.limbs.resize((alpha + 23) / 24 + 2);
            for (auto& l : v.limbs) l = static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask;
            BitVec got = extract_window(v, alpha, beta);
            LimbVec want = shift_right_bits(low_bits(v, alpha), alpha - beta);
            ok = got.nbits == beta;
            for (std::uint64_t bit = 0; bit < beta && ok; ++bit)
                ok = got.get(bit) == want.get_bit(bit);
        }
        report("bit window vs arithmetic mod-and-shift", ok);
    }
    {
        bool ok = false;
        try {
            MersenneCatalog catalog;
            ok = choose_k(0.3) == 3 && choose_k(0.1) == 9 && choose_k(0.5) == 1 &&
                 choose_gamma(catalog, 786432) == 756839 &&
                 block_size(756839, 3) == 2270517;
        } catch (const std::exception&) {
            ok = false;
        }
        report("parameter rules and catalog spot check", ok);
    }
    {
        bool ok = true;
        NttPlan plan = make_plan(64, radix);
        PaParams pp = PaParams::from_prng(521, 8, 256, 100, 7);
        std::vector<std::uint8_t> material(8 * 66 + 8, 0);
        for (auto& b : material) b = static_cast<std::uint8_t>(rng());
        CompressResult first = compress(pp, material, plan);
        CompressResult second = compress(pp, material, plan);
        ok = first.key == second.key && first.rejected_blocks == second.rejected_blocks &&
             first.key.nbits == 256;
        report("compression determinism, gamma=521", ok);
    }

    std::cout << (all_ok ? "selftest passed" : "selftest FAILED") << "\n";
    return all_ok ? kExitOk : kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MMH-MH privacy amplification engine"};
    app.require_subcommand(1);

    std::string in_path, out_path, seed_path;
    std::uint64_t gamma = 0, k = 0, r = 0, s = 0, seed = 1;
    unsigned radix = 16, trials = 5, threads = 1;
    bool inject_fault = false;

    auto add_radix = [&](CLI::App* sub) {
        sub->add_option("--radix", radix, "butterfly radix")
            ->check(CLI::IsMember({2, 4, 16}))
            ->capture_default_str();
    };

    CLI::App* c = app.add_subcommand("compress", "compress a key file to r bits");
    c->add_option("--in", in_path, "raw key material")->required();
    c->add_option("--seed-file", seed_path, "binary seeds a_1..a_k, b, c")->required();
    c->add_option("--out", out_path, "output key file")->required();
    c->add_option("--gamma", gamma, "Mersenne exponent")->required();
    c->add_option("--k", k, "sub-block count")->required();
    c->add_option("--r", r, "final key bits")->required();
    c->add_option("--s", s, "security parameter bits")->required();
    add_radix(c);

    CLI::App* b = app.add_subcommand("bench", "measure compression throughput");
    b->add_option("--gamma", gamma, "Mersenne exponent")->required();
    b->add_option("--k", k, "sub-block count")->required();
    b->add_option("--trials", trials, "timed trials (median reported)")->capture_default_str();
    b->add_option("--threads", threads, "parallel sessions")->capture_default_str();
    b->add_option("--seed", seed, "deterministic data seed")->capture_default_str();
    add_radix(b);

    CLI::App* kr = app.add_subcommand("keyrate", "tabulate k, N and final key rate");
    kr->add_option("--in", in_path, "rate curve CSV")->required();
    kr->add_option("--gamma", gamma, "Mersenne exponent")->required();
    kr->add_option("--out", out_path, "output CSV (default stdout)");
    add_radix(kr);

    CLI::App* st = app.add_subcommand("selftest", "run built-in consistency checks");
    st->add_flag("--inject-fault", inject_fault,
                 "corrupt a twiddle before testing (negative control)");
    add_radix(st);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(c))
            return cmd_compress(in_path, seed_path, out_path, gamma, k, r, s, radix);
        if (app.got_subcommand(b)) {
            if (trials == 0 || threads == 0)
                throw std::invalid_argument("trials and threads must be positive");
            return cmd_bench(gamma, k, radix, trials, threads, seed);
        }
        if (app.got_subcommand(kr))
            return cmd_keyrate(in_path, static_cast<std::uint32_t>(gamma), out_path);
        if (app.got_subcommand(st)) return cmd_selftest(inject_fault, radix);
    } catch (const paforge::InsufficientMaterialError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMaterial;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParam;
    }
    return kExitOk;
}
