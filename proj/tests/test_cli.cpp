#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "modnet/csv.hpp"
#include "modnet/model_io.hpp"

using namespace modnet;

namespace {

const std::string kBin = MODNET_CLI_PATH;
const std::string kTmp = std::string(MODNET_TEST_TMPDIR) + "/cli";

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run(const std::string& args) {
    const std::string out_path = kTmp + "/stdout.txt";
    const std::string err_path = kTmp + "/stderr.txt";
    const std::string cmd = kBin + " " + args + " >" + out_path + " 2>" + err_path;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    auto slurp = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string slurp_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool ensure_tmp() {
    static bool made = [] {
        return std::system(("mkdir -p " + kTmp).c_str()) == 0;
    }();
    return made;
}

}  // namespace

TEST_CASE("gen, learn, eval and recover form a working pipeline") {
    ensure_tmp();
    const std::string truth = kTmp + "/truth.json";
    const std::string data = kTmp + "/train.csv";
    const std::string test = kTmp + "/test.csv";
    const std::string model = kTmp + "/model.json";
    const std::string trace = kTmp + "/trace.csv";

    auto g = run("gen --n 30 --K-true 4 --count 150 --seed 7 --model-out " + truth +
                 " --data-out " + data);
    REQUIRE(g.exit_code == 0);
    auto g2 = run("gen --n 30 --K-true 4 --count 80 --seed 8 --model-out " + kTmp +
                  "/truth2.json --data-out " + test);
    REQUIRE(g2.exit_code == 0);

    CHECK(load_csv(data).instance_count() == 150);
    CHECK(load_csv(data).variable_count() == 30);

    auto l = run("learn --data " + data + " --K 4 --seed 5 --out " + model + " --trace " + trace);
    REQUIRE(l.exit_code == 0);
    CHECK(l.out.find("final_score=") != std::string::npos);
    CHECK(l.out.find("modules=4") != std::string::npos);
    CHECK(l.out.find("instances=150") != std::string::npos);

    const std::string trace_text = slurp_file(trace);
    CHECK(trace_text.rfind("iteration,kind,module,variable,score", 0) == 0);

    const ModuleNetwork learned = load_model(model);
    CHECK(learned.module_count() == 4);
    CHECK(learned.standardization.has_value());

    auto e = run("eval --model " + model + " --data " + data);
    REQUIRE(e.exit_code == 0);
    CHECK(e.out.find("heldout_ll_per_instance=") != std::string::npos);

    auto r = run("recover --learned " + model + " --truth " + truth + " --top 4");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("recovered_edge_fraction=") != std::string::npos);
    CHECK(r.out.find("top_module_mass=") != std::string::npos);
}

TEST_CASE("identical learn invocations produce byte-identical outputs") {
    ensure_tmp();
    const std::string data = kTmp + "/det.csv";
    REQUIRE(run("gen --n 12 --K-true 3 --count 60 --seed 11 --model-out " + kTmp +
                "/det_truth.json --data-out " + data)
                .exit_code == 0);
    for (int pass = 0; pass < 2; ++pass) {
        const std::string tag = std::to_string(pass + 1);
        auto l = run("learn --data " + data + " --K 3 --seed 9 --out " + kTmp + "/det" + tag +
                     ".json --trace " + kTmp + "/dtrace" + tag + ".csv");
        REQUIRE(l.exit_code == 0);
    }
    CHECK(slurp_file(kTmp + "/det1.json") == slurp_file(kTmp + "/det2.json"));
    CHECK(slurp_file(kTmp + "/dtrace1.csv") == slurp_file(kTmp + "/dtrace2.csv"));
}

TEST_CASE("sample writes a loadable dataset of the requested size") {
    ensure_tmp();
    const std::string truth = kTmp + "/struth.json";
    REQUIRE(run("gen --n 8 --K-true 2 --count 5 --seed 3 --model-out " + truth + " --data-out " +
                kTmp + "/sdata.csv")
                .exit_code == 0);
    const std::string sampled = kTmp + "/sampled.csv";
    auto s = run("sample --model " + truth + " --count 40 --seed 19 --out " + sampled);
    REQUIRE(s.exit_code == 0);
    const Dataset d = load_csv(sampled);
    CHECK(d.instance_count() == 40);
    CHECK(d.variable_count() == 8);
}

TEST_CASE("xval emits one record per fold and module count") {
    ensure_tmp();
    const std::string data = kTmp + "/xval.csv";
    REQUIRE(run("gen --n 8 --K-true 2 --count 40 --seed 13 --model-out " + kTmp +
                "/xtruth.json --data-out " + data)
                .exit_code == 0);
    const std::string report = kTmp + "/xval_report.csv";
    auto x = run("xval --data " + data + " --K 1 --K 2 --folds 5 --max-iters 5 --out " + report);
    REQUIRE(x.exit_code == 0);
    const std::string text = slurp_file(report);
    std::istringstream lines(text);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "K,fold,train_count,test_count,heldout,baseline,delta");
    int records = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++records;
    CHECK(records == 10);  // 2 module counts x 5 folds
}

TEST_CASE("enrich scores every module-label pair") {
    ensure_tmp();
    const std::string members = kTmp + "/members.csv";
    const std::string labels = kTmp + "/labels.csv";
    {
        std::ofstream m(members);
        m << "g1,0\ng2,0\ng3,1\ng4,1\ng5,1\n";
        std::ofstream l(labels);
        l << "g1,heat\ng2,heat\ng3,cold\ng5,heat\n";
    }
    const std::string out = kTmp + "/enrich.csv";
    auto e = run("enrich --members " + members + " --labels " + labels + " --out " + out);
    REQUIRE(e.exit_code == 0);
    const std::string text = slurp_file(out);
    std::istringstream lines(text);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "module,label,module_size,annotated,hits,pvalue");
    int records = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++records;
    CHECK(records == 4);  // 2 modules x 2 labels
}

TEST_CASE("usage errors exit 2 and runtime errors exit 1") {
    ensure_tmp();
    SUBCASE("K must be positive") {
        auto r = run("learn --data whatever.csv --K 0");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("usage error") != std::string::npos);
    }
    SUBCASE("unknown flag") {
        auto r = run("learn --no-such-flag");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("missing subcommand") {
        auto r = run("");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("missing model file") {
        auto r = run("eval --model " + kTmp + "/absent.json --data " + kTmp + "/absent.csv");
        CHECK(r.exit_code == 1);
        CHECK(r.err.rfind("error: ", 0) == 0);
        CHECK(r.err.find('\n') == r.err.size() - 1);  // a single line
    }
    SUBCASE("help exits 0") {
        CHECK(run("--help").exit_code == 0);
        CHECK(run("learn --help").exit_code == 0);
    }
}
