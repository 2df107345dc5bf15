#pragma once

// The `brel` command line: gen / build / query / setop / suite.
// Exit codes: 0 ok, 1 verification or I/O failure, 2 bad flags or
// arguments, 3 malformed input file, 4 kind or dimension mismatch.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "brel/bench.hpp"
#include "brel/datagen.hpp"
#include "brel/io.hpp"
#include "brel/relation.hpp"

namespace brel::cli {

enum ExitCode : int { ok = 0, failure = 1, bad_arguments = 2, bad_format = 3, mismatch = 4 };

class VerifyFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// BREL_SEED, when set, replaces built-in default seeds.
inline std::uint64_t default_seed(std::uint64_t fallback) {
    if (const char* env = std::getenv("BREL_SEED")) {
        try {
            std::size_t used = 0;
            auto v = std::stoull(env, &used, 0);
            if (used == std::string_view(env).size())
                return v;
        } catch (const std::exception&) {
        }
        throw ArgumentError("BREL_SEED is not an unsigned integer: '" + std::string(env) + "'");
    }
    return fallback;
}

inline constexpr std::uint64_t default_query_seed = 0x5eed;

struct DatasetConfig {
    std::string name;
    std::optional<GenSpec> spec; // generated, partner from seed + 1
    std::string path;            // or loaded from BRADJ1
    std::string partner_path;
};

struct SuiteConfig {
    std::uint64_t runs = 1000;
    std::uint64_t setop_runs = 1;
    std::uint64_t repeat = 3;
    std::uint64_t seed = default_query_seed;
    std::uint64_t range_size = default_range_size;
    std::vector<DatasetConfig> datasets;
    std::vector<Kind> structures{all_kinds, all_kinds + 4};
    std::vector<std::string> operations{"isrelated", "succ", "pred", "range", "union", "inter", "diff", "symdiff"};
};

struct SuiteOptions {
    bool verify = false;
    bool compare_navigation = false;
    unsigned jobs = 1;
};

inline bool is_set_op_name(std::string_view s) {
    for (auto op : all_set_ops)
        if (to_string(op) == s)
            return true;
    return false;
}

inline SuiteConfig parse_suite_config(std::string_view text) {
    SuiteConfig c;
    c.seed = default_seed(default_query_seed);
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        return c;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("suite config is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ArgumentError("suite config must be a JSON object");
    try {
        c.runs = j.value("runs", c.runs);
        c.setop_runs = j.value("setop_runs", c.setop_runs);
        c.repeat = j.value("repeat", c.repeat);
        c.seed = j.value("seed", c.seed);
        c.range_size = j.value("range_size", c.range_size);
        if (c.runs == 0 || c.setop_runs == 0 || c.repeat == 0)
            throw ArgumentError("runs, setop_runs and repeat must be positive");
        if (j.contains("structures")) {
            c.structures.clear();
            for (const auto& s : j.at("structures"))
                c.structures.push_back(parse_kind(s.get<std::string>()));
        }
        if (j.contains("operations")) {
            c.operations.clear();
            for (const auto& s : j.at("operations")) {
                auto name = s.get<std::string>();
                if (!is_set_op_name(name))
                    parse_query_op(name);
                c.operations.push_back(name);
            }
        }
        for (const auto& d : j.value("datasets", nlohmann::json::array())) {
            DatasetConfig ds;
            if (d.contains("path")) {
                ds.path = d.at("path").get<std::string>();
                ds.partner_path = d.value("partner", std::string());
                ds.name = d.value("name", std::filesystem::path(ds.path).stem().string());
            } else {
                GenSpec g;
                g.model = parse_model(d.at("model").get<std::string>());
                g.n = d.at("n").get<NodeId>();
                if (d.contains("m"))
                    g.m = d.at("m").get<std::uint64_t>();
                else if (d.contains("avg_degree"))
                    g.m = static_cast<std::uint64_t>(std::llround(g.n * d.at("avg_degree").get<double>()));
                else if (d.contains("density"))
                    g.m = static_cast<std::uint64_t>(
                        std::llround(static_cast<double>(g.n) * g.n * d.at("density").get<double>()));
                else
                    throw ArgumentError("dataset needs one of m, avg_degree or density");
                g.k = d.value("k", g.k);
                g.seed = d.value("seed", default_seed(1));
                g.clusters = d.value("clusters", g.clusters);
                g.cluster_side = d.value("cluster_side", g.cluster_side);
                g.cluster_density = d.value("cluster_density", g.cluster_density);
                validate(g);
                ds.spec = g;
                ds.name = d.value("name", std::string(to_string(g.model)) + "-" + std::to_string(g.n));
            }
            c.datasets.push_back(std::move(ds));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("bad suite config: ") + e.what());
    }
    return c;
}

// Navigation comparison for one dataset, reported on stderr.
struct NavigationReport {
    std::string dataset;
    double cursor_ms = 0, rank_ms = 0;
    NavigationMemory memory;
};

namespace detail {

struct LoadedDataset {
    std::string name;
    PlainRelation relation;
    std::optional<PlainRelation> partner;
};

inline LoadedDataset load_dataset(const DatasetConfig& d) {
    LoadedDataset out{d.name, {}, std::nullopt};
    if (d.spec) {
        out.relation = generate(*d.spec);
        GenSpec partner = *d.spec;
        partner.seed += 1;
        out.partner = generate(partner);
    } else {
        out.relation = load(d.path);
        if (!d.partner_path.empty())
            out.partner = load(d.partner_path);
    }
    return out;
}

inline std::string error_status(const std::exception& e) { return std::string("error: ") + e.what(); }

template <typename F>
double median_ms(std::uint64_t repeat, F&& once) {
    std::vector<double> samples;
    for (std::uint64_t i = 0; i < repeat; ++i)
        samples.push_back(once());
    return median(std::move(samples));
}

} // namespace detail

inline std::vector<BenchResult> run_suite(const SuiteConfig& config, const SuiteOptions& options,
                                          std::vector<NavigationReport>* navigation = nullptr) {
    std::vector<detail::LoadedDataset> data;
    for (const auto& d : config.datasets)
        data.push_back(detail::load_dataset(d));

    struct Cell {
        std::size_t dataset;
        Kind kind;
    };
    std::vector<Cell> cells;
    for (std::size_t d = 0; d < data.size(); ++d)
        for (auto k : config.structures)
            cells.push_back({d, k});

    std::vector<std::vector<BenchResult>> rows(cells.size());
    std::vector<std::optional<NavigationReport>> reports(cells.size());

    auto run_cell = [&](std::size_t index) {
        const auto& cell = cells[index];
        const auto& ds = data[cell.dataset];
        auto& out = rows[index];
        const std::string kind(to_string(cell.kind));
        std::optional<Structure> s, partner;
        std::uint64_t size = 0;
        try {
            s = build_structure(cell.kind, ds.relation);
            size = size_in_bytes(*s);
            if (ds.partner)
                partner = build_structure(cell.kind, *ds.partner);
        } catch (const std::exception& e) {
            for (const auto& op : config.operations)
                out.push_back({ds.name, kind, op, 0, 0, 0, detail::error_status(e)});
            return;
        }
        for (const auto& op : config.operations) {
            BenchResult r{ds.name, kind, op, 0, 0, size, "ok"};
            try {
                if (is_set_op_name(op)) {
                    if (!partner)
                        throw ArgumentError("dataset has no partner relation");
                    const SetOp sop = parse_set_op(op);
                    r.runs = config.setop_runs;
                    Structure result;
                    r.total_ms = detail::median_ms(config.repeat, [&] {
                        auto t = time_set_operation(sop, *s, *partner, config.setop_runs);
                        result = std::move(t.result);
                        return t.total_ms;
                    });
                    if (options.verify && decode(result) != set_operation(sop, ds.relation, *ds.partner))
                        r.status = "verify-failed";
                } else {
                    auto w = sample_workload(parse_query_op(op), ds.relation, config.runs, config.seed,
                                             config.range_size);
                    r.runs = config.runs;
                    r.total_ms = detail::median_ms(config.repeat, [&] { return time_queries(*s, w).total_ms; });
                    if (options.verify && !verify_queries(*s, ds.relation, w))
                        r.status = "verify-failed";
                }
            } catch (const std::exception& e) {
                r.status = detail::error_status(e);
            }
            out.push_back(std::move(r));
        }
        if (options.compare_navigation && cell.kind == Kind::brwt && partner) {
            NavigationReport rep{ds.name, 0, 0, {}};
            const auto& a = std::get<Brwt>(*s);
            const auto& b = std::get<Brwt>(*partner);
            for (auto nav : {Navigation::cursor, Navigation::rank}) {
                BenchResult r{ds.name, kind, nav == Navigation::cursor ? "inter-cursor" : "inter-rank",
                              config.setop_runs, 0, size, "ok"};
                try {
                    Structure result;
                    r.total_ms = detail::median_ms(config.repeat, [&] {
                        auto t = time_set_operation(SetOp::intersection, *s, *partner, config.setop_runs, nav);
                        result = std::move(t.result);
                        return t.total_ms;
                    });
                    if (options.verify &&
                        decode(result) != set_operation(SetOp::intersection, ds.relation, *ds.partner))
                        r.status = "verify-failed";
                } catch (const std::exception& e) {
                    r.status = detail::error_status(e);
                }
                (nav == Navigation::cursor ? rep.cursor_ms : rep.rank_ms) = r.total_ms;
                out.push_back(std::move(r));
            }
            rep.memory = intersection_navigation_memory(a, b);
            reports[index] = rep;
        }
    };

    const unsigned jobs = std::max(1u, options.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, cells.size()); ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < cells.size();)
                    run_cell(i);
            });
        for (auto& t : pool)
            t.join();
    }

    std::vector<BenchResult> all;
    for (auto& r : rows)
        all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    if (navigation)
        for (auto& r : reports)
            if (r)
                navigation->push_back(std::move(*r));
    return all;
}

namespace detail {

inline void write_csv(const std::vector<BenchResult>& rows, const std::string& path, std::ostream& out) {
    std::ostringstream csv;
    csv << csv_header << '\n';
    for (const auto& r : rows)
        csv << to_csv(r) << '\n';
    if (path.empty())
        out << csv.str();
    else
        io::write_file(path, csv.str());
}

inline Structure load_structure(const std::string& path) { return deserialize_structure(io::read_file(path)); }

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compressed binary relations: generation, construction, queries, set operations, benchmarks"};
    app.require_subcommand(1);

    // gen
    GenSpec spec;
    std::string gen_out;
    std::string model_name = "random";
    std::optional<std::uint64_t> gen_seed;
    auto* gen = app.add_subcommand("gen", "generate a synthetic relation as a BRADJ1 file");
    gen->add_option("--model", model_name, "random | smallworld | barabasi | clustered")
        ->check(CLI::IsMember({"random", "smallworld", "barabasi", "clustered"}));
    gen->add_option("--nodes,-n", spec.n, "node count")->required();
    gen->add_option("--edges,-m", spec.m, "pair count")->required();
    gen->add_option("--k", spec.k, "ring neighbours (smallworld) or links per node (barabasi)");
    gen->add_option("--seed", gen_seed, "RNG seed (default: BREL_SEED or 1)");
    gen->add_option("--clusters", spec.clusters, "clustered: number of clusters");
    gen->add_option("--cluster-side", spec.cluster_side, "clustered: cluster side, 0 picks the smallest that fits");
    gen->add_option("--cluster-density", spec.cluster_density, "clustered: density inside clusters");
    gen->add_option("-o,--out", gen_out, "output file")->required();

    // build
    std::string build_kind, build_in, build_out;
    bool build_verify = false;
    auto* build = app.add_subcommand("build", "build and serialize a structure from a BRADJ1 file");
    build->add_option("--structure,-s", build_kind, "kt | ktone | brwt | rice")
        ->required()
        ->check(CLI::IsMember({"kt", "ktone", "brwt", "rice"}));
    build->add_option("input", build_in, "BRADJ1 relation")->required();
    build->add_option("output", build_out, "structure file")->required();
    build->add_flag("--verify", build_verify, "check that the structure decodes to the input");

    // query
    std::string query_file, query_op = "succ", query_dataset, query_csv, query_oracle;
    std::uint64_t query_runs = 1000, range_size = default_range_size;
    std::optional<std::uint64_t> query_seed;
    bool query_verify = false;
    auto* query = app.add_subcommand("query", "time a batch of seeded random queries on a structure file");
    query->add_option("structure", query_file, "structure file")->required();
    query->add_option("--op", query_op, "isrelated | isrelated-true | succ | pred | range")
        ->check(CLI::IsMember({"isrelated", "isrelated-true", "succ", "pred", "range"}));
    query->add_option("--runs", query_runs, "number of queries")->check(CLI::PositiveNumber);
    query->add_option("--seed", query_seed, "query argument seed");
    query->add_option("--range-size", range_size, "side of range queries")->check(CLI::PositiveNumber);
    query->add_option("--dataset", query_dataset, "dataset label for the CSV row");
    query->add_option("--out", query_csv, "write the CSV here instead of stdout");
    query->add_flag("--verify", query_verify, "compare every answer with the oracle");
    query->add_option("--oracle", query_oracle, "BRADJ1 oracle for --verify (default: the decoded structure)");

    // setop
    std::string set_a, set_b, set_out, set_op = "union", set_dataset, set_csv, set_nav = "cursor";
    std::uint64_t set_runs = 1;
    bool set_verify = false;
    auto* setop = app.add_subcommand("setop", "combine two structure files of the same kind");
    setop->add_option("a", set_a, "first operand")->required();
    setop->add_option("b", set_b, "second operand")->required();
    setop->add_option("output", set_out, "result structure file")->required();
    setop->add_option("--op", set_op, "union | inter | diff | symdiff")
        ->check(CLI::IsMember({"union", "inter", "diff", "symdiff"}));
    setop->add_option("--runs", set_runs, "repetitions to time")->check(CLI::PositiveNumber);
    setop->add_option("--navigation", set_nav, "brwt depth-first navigation: cursor | rank")
        ->check(CLI::IsMember({"cursor", "rank"}));
    setop->add_option("--dataset", set_dataset, "dataset label for the CSV row");
    setop->add_option("--out", set_csv, "write the CSV here instead of stdout");
    setop->add_flag("--verify", set_verify, "compare the result with the oracle");

    // suite
    std::string suite_config, suite_csv;
    SuiteOptions suite_options;
    auto* suite = app.add_subcommand("suite", "run a datasets x structures x operations benchmark");
    suite->add_option("--config,-c", suite_config, "JSON suite description")->required();
    suite->add_option("--out", suite_csv, "write the CSV here instead of stdout");
    suite->add_flag("--verify", suite_options.verify, "cross-check every result with the oracle");
    suite->add_flag("--compare-navigation", suite_options.compare_navigation,
                    "add cursor vs rank/select brwt intersection rows");
    suite->add_option("--jobs,-j", suite_options.jobs, "parallel (dataset, structure) cells")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? ok : bad_arguments;
    }

    try {
        if (*gen) {
            spec.model = parse_model(model_name);
            spec.seed = gen_seed ? *gen_seed : default_seed(1);
            auto r = generate(spec);
            save(r, gen_out);
            out << "m=" << r.pair_count() << " density=" << density(r) << '\n';
        } else if (*build) {
            auto r = load(build_in);
            auto s = build_structure(parse_kind(build_kind), r);
            auto bytes = serialize(s);
            if (build_verify && decode(s) != r)
                throw VerifyFailure("structure does not decode to its input");
            io::write_file(build_out, bytes);
            out << "structure=" << build_kind << " size_bytes=" << size_in_bytes(s) << " file_bytes=" << bytes.size()
                << '\n';
        } else if (*query) {
            auto s = detail::load_structure(query_file);
            auto oracle = query_oracle.empty() ? decode(s) : load(query_oracle);
            const auto op = parse_query_op(query_op);
            auto w = sample_workload(op, oracle, query_runs, query_seed ? *query_seed : default_seed(default_query_seed),
                                     range_size);
            auto t = time_queries(s, w);
            if (query_verify && !verify_queries(s, oracle, w))
                throw VerifyFailure("query answers differ from the oracle");
            BenchResult r{query_dataset.empty() ? std::filesystem::path(query_file).stem().string() : query_dataset,
                          std::string(to_string(kind_of(s))),
                          query_op,
                          query_runs,
                          t.total_ms,
                          size_in_bytes(s),
                          "ok"};
            detail::write_csv({r}, query_csv, out);
        } else if (*setop) {
            auto a = detail::load_structure(set_a);
            auto b = detail::load_structure(set_b);
            const auto op = parse_set_op(set_op);
            auto t = time_set_operation(op, a, b, set_runs, set_nav == "rank" ? Navigation::rank : Navigation::cursor);
            if (set_verify && decode(t.result) != set_operation(op, decode(a), decode(b)))
                throw VerifyFailure("set operation result differs from the oracle");
            io::write_file(set_out, serialize(t.result));
            BenchResult r{set_dataset.empty() ? std::filesystem::path(set_a).stem().string() : set_dataset,
                          std::string(to_string(kind_of(a))),
                          set_op,
                          set_runs,
                          t.total_ms,
                          size_in_bytes(t.result),
                          "ok"};
            detail::write_csv({r}, set_csv, out);
        } else if (*suite) {
            std::string text;
            try {
                text = io::read_file(suite_config);
            } catch (const FormatError& e) {
                throw ArgumentError(e.what());
            }
            auto config = parse_suite_config(text);
            std::vector<NavigationReport> reports;
            auto rows = run_suite(config, suite_options, &reports);
            detail::write_csv(rows, suite_csv, out);
            for (const auto& rep : reports) {
                err << "navigation " << rep.dataset << ": cursor " << rep.cursor_ms << " ms, rank/select "
                    << rep.rank_ms << " ms, speedup " << (rep.cursor_ms > 0 ? rep.rank_ms / rep.cursor_ms : 0.0)
                    << "x, cursor tables " << rep.memory.cursor_tables << " B over a rank/select working set of "
                    << rep.memory.rank_working_set << " B (" << 100.0 * rep.memory.overhead() << "% overhead)\n";
            }
            if (!rows.empty() && std::none_of(rows.begin(), rows.end(), [](const auto& r) { return r.ok(); })) {
                err << "every suite row failed\n";
                return failure;
            }
        }
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << '\n';
        return mismatch;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return bad_arguments;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return bad_format;
    } catch (const VerifyFailure& e) {
        err << "verify failed: " << e.what() << '\n';
        return failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
    return ok;
}

} // namespace brel::cli
