#include "lsfkit_cli/cli.hpp"

#include "lsfkit/datasets.hpp"
#include "lsfkit/error.hpp"
#include "lsfkit/lsf.hpp"
#include "lsfkit_cli/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace lsfkit::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); }

// LSFKIT_SEED replaces the built-in default of every --seed flag.
uint64_t defaultSeed(uint64_t fallback) {
    const char *env = std::getenv("LSFKIT_SEED");
    if (!env || !*env)
        return fallback;
    try {
        size_t used = 0;
        const uint64_t v = std::stoull(env, &used, 0);
        if (used == std::string(env).size())
            return v;
    } catch (const std::exception &) {
    }
    throw Error(ErrorCode::InvalidArgument, std::string("LSFKIT_SEED is not an integer: ") + env);
}

std::string schemaPathFor(const std::string &data, const std::string &explicitPath) {
    return explicitPath.empty() ? data + ".schema.json" : explicitPath;
}

std::vector<std::byte> readFile(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> bytes(chars.size());
    std::memcpy(bytes.data(), chars.data(), chars.size());
    return bytes;
}

void writeFile(const std::string &path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

void writeText(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    out << text;
}

double entropyOfLabels(std::span<const uint32_t> labels, uint32_t classes) {
    std::vector<double> p(classes, 0.0);
    for (uint32_t v : labels)
        p[v] += 1.0;
    for (double &x : p)
        x /= std::max<size_t>(labels.size(), 1);
    return entropy(p);
}

struct GenArgs {
    std::string dataset = "gauss";
    size_t n = 1000000;
    double sigma = 1.0;
    uint32_t classes = 8;
    uint64_t seed = 42;
    std::string out;
};

int cmdGen(const GenArgs &a, std::ostream &out) {
    const Dataset ds = genGauss(a.n, a.sigma, a.seed, a.classes);
    saveCsv(a.out, ds);
    writeText(a.out + ".schema.json", ds.schema.toJson());
    out << "wrote " << ds.size() << " rows to " << a.out << "\n";
    return kOk;
}

struct BuildArgs {
    std::string model = "gnb";
    std::string data;
    std::string schema;
    std::string out;
    double holdout = 0;
    uint64_t seed = kDefaultMasterSeed;
    double overload = 0.01;
    uint32_t bucketSize = 512;
    bool randomizedRounding = false;
    bool json = false;
};

int cmdBuild(const BuildArgs &a, std::ostream &out) {
    const Schema schema = loadSchema(schemaPathFor(a.data, a.schema));
    const Dataset ds = loadCsv(a.data, schema);

    Dataset train = ds;
    std::optional<Dataset> test;
    if (a.holdout > 0) {
        if (a.holdout >= 1)
            throw Error(ErrorCode::InvalidArgument, "--holdout must be in [0, 1)");
        const double fractions[] = {1.0 - a.holdout, a.holdout};
        auto parts = split(ds, fractions, a.seed);
        train = std::move(parts[0]);
        test = std::move(parts[1]);
    }

    LsfConfig cfg;
    cfg.seed = a.seed;
    cfg.ribbon.overload = a.overload;
    cfg.ribbon.bucketSize = a.bucketSize;
    cfg.randomizedRounding = a.randomizedRounding;

    BuildReport report;
    report.model = a.model;
    report.seed = a.seed;
    report.classes = ds.classes();
    Lsf lsf;
    const auto t0 = Clock::now();
    ProbabilityModel model;
    if (a.model == "gnb") {
        GnbOptions opt;
        opt.allowEmptyClasses = true;
        model = gnbFit(train.features, train.labels, ds.classes(), opt);
    } else if (a.model == "lr") {
        LrHyper hyper;
        hyper.seed = a.seed;
        model = lrFit(train.features, train.labels, ds.classes(), hyper);
    }
    const auto t1 = Clock::now();
    if (a.model == "freq")
        lsf = Lsf::buildCsf(ds.keys, ds.labels, ds.valueNames, cfg);
    else
        lsf = Lsf::build(ds.keys, ds.features, ds.labels, ds.valueNames, model, ds.prep, cfg);
    const auto t2 = Clock::now();
    writeFile(a.out, lsf.serialize());

    report.mode = lsf.mode() == LsfMode::Csf ? "csf" : "learned";
    report.trainSeconds = seconds(t0, t1);
    report.constructionUsPerKey = ds.size() ? seconds(t1, t2) * 1e6 / static_cast<double>(ds.size()) : 0.0;
    report.ledger = lsf.ledger();
    report.h0 = entropyOfLabels(ds.labels, ds.classes());
    report.maxFilterLength = lsf.maxFilterLength();
    report.maxCorrectionLength = lsf.maxCorrectionLength();
    const Dataset &evalSet = test ? *test : ds;
    report.ece = ece(lsf.model(), evalSet.features, evalSet.labels);
    report.accuracy = accuracy(lsf.model(), ds.features, ds.labels);
    if (test)
        report.holdoutAccuracy = accuracy(lsf.model(), test->features, test->labels);
    out << (a.json ? toJson(report) : toText(report));
    return kOk;
}

struct QueryArgs {
    std::string structure;
    std::string data;
    std::string schema;
    bool verify = false;
    bool bench = false;
    size_t sample = 1000000;
    uint32_t runs = 10;
    uint32_t threads = 1;
    uint64_t seed = 7;
    bool json = false;
};

struct QueryRows {
    std::vector<std::string> keys;
    FeatureMatrix features;
    std::vector<std::string> labels; // empty when the table has no label column
};

QueryRows loadQueryRows(const Lsf &lsf, const QueryArgs &a) {
    const RawTable table = readCsv(a.data);
    Schema schema;
    const std::string schemaPath = schemaPathFor(a.data, a.schema);
    if (!a.schema.empty() || std::filesystem::exists(schemaPath))
        schema = loadSchema(schemaPath);
    else if (std::find(table.header.begin(), table.header.end(), "key") != table.header.end())
        schema.keyColumn = "key";

    const auto &columns = lsf.preprocessor().columns();
    std::vector<size_t> featureCols;
    for (const auto &c : columns)
        featureCols.push_back(table.column(c.name));
    const size_t keyCol = schema.keyColumn.empty() ? SIZE_MAX : table.column(schema.keyColumn);
    const auto labelIt = std::find(table.header.begin(), table.header.end(), schema.labelColumn);

    QueryRows rows;
    const size_t n = table.rows.size();
    rows.features = FeatureMatrix(n, lsf.preprocessor().dim());
    std::vector<std::string_view> fields(featureCols.size());
    for (size_t r = 0; r < n; ++r) {
        const auto &row = table.rows[r];
        rows.keys.push_back(keyCol == SIZE_MAX ? std::to_string(r) : row[keyCol]);
        if (labelIt != table.header.end())
            rows.labels.push_back(row[static_cast<size_t>(labelIt - table.header.begin())]);
        for (size_t c = 0; c < featureCols.size(); ++c)
            fields[c] = row[featureCols[c]];
        lsf.preprocessor().transform(fields, rows.features.row(r));
    }
    return rows;
}

int cmdQuery(const QueryArgs &a, std::ostream &out) {
    const Lsf lsf = Lsf::deserialize(readFile(a.structure));
    const QueryRows rows = loadQueryRows(lsf, a);
    const size_t n = rows.keys.size();
    QueryReport report;
    report.rows = n;

    auto featuresOf = [&](size_t i) {
        return rows.features.cols ? rows.features.row(i) : std::span<const double>{};
    };

    if (a.verify) {
        if (rows.labels.empty())
            throw Error(ErrorCode::MissingColumn, "--verify needs a label column in " + a.data);
        report.verified = true;
        for (size_t i = 0; i < n; ++i)
            if (lsf.valueName(lsf.query(rows.keys[i], featuresOf(i))) != rows.labels[i])
                ++report.mismatches;
    }

    if (a.bench && n > 0) {
        std::mt19937_64 rng(a.seed);
        std::vector<size_t> sample(a.sample);
        for (size_t &s : sample)
            s = static_cast<size_t>(rng() % n);
        const uint32_t threads = std::max<uint32_t>(a.threads, 1);
        std::vector<uint32_t> reference(sample.size());
        QueryStats stats;
        for (size_t t = 0; t < sample.size(); ++t)
            reference[t] = lsf.query(rows.keys[sample[t]], featuresOf(sample[t]), {}, &stats);

        double total = 0;
        std::vector<uint32_t> answers(sample.size());
        for (uint32_t run = 0; run < a.runs; ++run) {
            const auto t0 = Clock::now();
            std::vector<std::thread> pool;
            for (uint32_t w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    const size_t lo = sample.size() * w / threads;
                    const size_t hi = sample.size() * (w + 1) / threads;
                    for (size_t t = lo; t < hi; ++t)
                        answers[t] = lsf.query(rows.keys[sample[t]], featuresOf(sample[t]));
                });
            }
            for (auto &th : pool)
                th.join();
            total += seconds(t0, Clock::now());
            if (answers != reference)
                throw Error(ErrorCode::InvalidArgument, "concurrent queries disagree with sequential answers");
        }
        report.benchKeys = sample.size();
        report.benchRuns = a.runs;
        report.threads = threads;
        report.usPerKey = sample.empty() || a.runs == 0
                              ? 0.0
                              : total * 1e6 / (static_cast<double>(sample.size()) * a.runs);
        report.fastPathRate = stats.queries ? static_cast<double>(stats.fastPath) / stats.queries : 0.0;
    }

    if (!a.verify && !a.bench) {
        for (size_t i = 0; i < n; ++i)
            out << rows.keys[i] << ',' << lsf.valueName(lsf.query(rows.keys[i], featuresOf(i))) << '\n';
    } else {
        out << (a.json ? toJson(report) : toText(report));
    }
    return report.mismatches ? kVerifyFailed : kOk;
}

struct Figure4Args {
    size_t points = 1000;
    std::string out;
    bool json = false;
};

int cmdFigure4(const Figure4Args &a, std::ostream &out, std::ostream &err) {
    const auto rows = figure4(a.points);
    const Figure4Peak pi = peakInt(rows);
    const Figure4Peak pr = peakReal(rows);
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f)
            throw Error(ErrorCode::Io, "cannot write " + a.out);
        writeFigure4Csv(f, rows);
    } else if (!a.json) {
        writeFigure4Csv(out, rows);
    }
    if (a.json) {
        nlohmann::json j;
        j["command"] = "figure4";
        j["points"] = rows.size();
        j["max_overhead_int"] = pi.overhead;
        j["argmax_p_int"] = pi.p;
        j["max_overhead_real"] = pr.overhead;
        j["argmax_p_real"] = pr.p;
        out << j.dump() << "\n";
    } else {
        char buf[160];
        std::snprintf(buf, sizeof buf, "max overhead: integer r %.4f at p=%.4f, real r %.4f at p=%.4f\n",
                      pi.overhead, pi.p, pr.overhead, pr.p);
        err << buf;
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"lsfkit: learned static functions"};
    app.require_subcommand(1);

    GenArgs gen;
    BuildArgs build;
    QueryArgs query;
    Figure4Args fig;
    try {
        gen.seed = defaultSeed(gen.seed);
        build.seed = defaultSeed(build.seed);
        query.seed = defaultSeed(query.seed);
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    auto *g = app.add_subcommand("gen", "Generate a synthetic dataset as CSV plus schema sidecar");
    g->add_option("dataset", gen.dataset, "Dataset family")->check(CLI::IsMember({"gauss"}))->required();
    g->add_option("--n", gen.n, "Number of rows (truncated to a multiple of --classes)");
    g->add_option("--sigma", gen.sigma, "Standard deviation of every class");
    g->add_option("--classes", gen.classes, "Number of classes");
    g->add_option("--seed", gen.seed, "Generator seed");
    g->add_option("--out", gen.out, "Output CSV path")->required();

    auto *b = app.add_subcommand("build", "Train a model and build an LSF (or CSF for --model freq)");
    b->add_option("--model", build.model, "gnb | lr | freq")->check(CLI::IsMember({"gnb", "lr", "freq"}));
    b->add_option("--data", build.data, "Input CSV")->required();
    b->add_option("--schema", build.schema, "Schema JSON (default: <data>.schema.json)");
    b->add_option("--out", build.out, "Output structure file")->required();
    b->add_option("--holdout", build.holdout, "Train the model on a stratified 1-h share and report accuracy on h");
    b->add_option("--seed", build.seed, "Master seed");
    b->add_option("--overload", build.overload, "Ribbon overload factor");
    b->add_option("--bucket-size", build.bucketSize, "Starting positions per ribbon bucket");
    b->add_flag("--randomized-rounding", build.randomizedRounding, "Randomly round filter lengths");
    b->add_flag("--json", build.json, "Emit the report as one JSON object");

    auto *q = app.add_subcommand("query", "Query a structure with the rows of a CSV");
    q->add_option("--structure", query.structure, "Structure file")->required();
    q->add_option("--data", query.data, "CSV with key and feature columns")->required();
    q->add_option("--schema", query.schema, "Schema JSON (default: <data>.schema.json if present)");
    q->add_flag("--verify", query.verify, "Compare answers with the label column; exit 1 on mismatch");
    q->add_flag("--bench", query.bench, "Time queries over a random sample of rows");
    q->add_option("--sample", query.sample, "Keys per benchmark run");
    q->add_option("--runs", query.runs, "Benchmark repetitions");
    q->add_option("--threads", query.threads, "Benchmark worker threads");
    q->add_option("--seed", query.seed, "Sampling seed");
    q->add_flag("--json", query.json, "Emit the report as one JSON object");

    auto *f = app.add_subcommand("figure4", "Idealized space overhead of the weighted filter construction");
    f->add_option("--points", fig.points, "Grid size over (0, 1/2]")->check(CLI::PositiveNumber);
    f->add_option("--out", fig.out, "CSV output path (default: stdout)");
    f->add_flag("--json", fig.json, "Print the maxima as JSON");

    std::vector<const char *> argv;
    for (const auto &s : args)
        argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (g->parsed())
            return cmdGen(gen, out);
        if (b->parsed())
            return cmdBuild(build, out);
        if (q->parsed())
            return cmdQuery(query, out);
        if (f->parsed())
            return cmdFigure4(fig, out, err);
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

} // namespace lsfkit::cli
