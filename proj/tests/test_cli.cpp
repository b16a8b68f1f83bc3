#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "check.hpp"
#include "zkrect/cli.hpp"

using namespace zkrect;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run call(const std::vector<std::string>& args)
{
    std::ostringstream o, e;
    const int c = cli::run(args, o, e);
    return {c, o.str(), e.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("zkrect_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string schema_message(const json& doc)
{
    try {
        cli::load_config(doc);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Schema);
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("roots subcommand")
{
    const Run r = call({"roots", "--theta", "1", "--a", "0"});
    CHECK(r.code == 0);
    CHECK(r.out.find("r1 = 0.866025403784438") != std::string::npos);
    CHECK(r.out.find("-0.5i") != std::string::npos);
    CHECK(r.out.find("r2 = 0+1i") != std::string::npos);
}

TEST_CASE("decay-verify on the default square")
{
    const fs::path out = scratch("decay");
    const Run r = call({"decay-verify", "--out", out.string()});
    CHECK(r.code == 0);
    const json j = json::parse(slurp(out / "summary.json"));
    CHECK(j["kappa"].get<double>() == doctest::Approx(2.0));
    CHECK(j["admissible"].get<bool>());
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "decay.csv"));
    fs::remove_all(out);
}

TEST_CASE("hypothesis violation exits with 2")
{
    const fs::path out = scratch("violation");
    const fs::path cfg = out.string() + ".json";
    std::ofstream(cfg) << R"({"b": 5.0})";
    const Run r = call({"decay-verify", "--config", cfg.string(), "--out", out.string()});
    CHECK(r.code == 2);
    fs::remove_all(out);
    fs::remove(cfg);
}

TEST_CASE("unknown subcommand and bad input")
{
    const Run r = call({"frobnicate"});
    CHECK(r.code == 1);
    CHECK(r.err.find("simulate") != std::string::npos);
    CHECK(call({}).code == 1);
    CHECK(call({"simulate", "--config", "/nonexistent/zk.json"}).code == 1);
}

TEST_CASE("configuration defaults")
{
    const auto c = cli::load_config(json::object());
    CHECK(c.delta == 0.5);
    CHECK(c.grid.Nx == 64);
    CHECK(c.grid.n_modes == 16);
    CHECK(c.grid.dt == doctest::Approx(1e-2));
    CHECK(c.echo["case"] == "a");
    const auto d = cli::load_config({{"amplitude", 10.0}});
    CHECK(d.grid.dt == doctest::Approx(0.5 * (3.141592653589793 / 64) / 10.0));
}

TEST_CASE("configuration errors are enumerated with field paths")
{
    CHECK(schema_message({{"R", -1.0}}).find("/R") != std::string::npos);
    CHECK(schema_message({{"case", "e"}}).find("/case") != std::string::npos);
    const std::string m = schema_message({{"R", -1.0}, {"case", "e"}, {"Nx", "many"}, {"delta", 1.5}, {"zz", 1}});
    for (const char* f : {"/R", "/case", "/Nx", "/delta", "/zz"}) CHECK(m.find(f) != std::string::npos);
}

TEST_CASE("identical seeds give identical summaries")
{
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    CHECK(call({"simulate", "--seed", "7", "--T", "0.2", "--out", a.string()}).code == 0);
    CHECK(call({"simulate", "--seed", "7", "--T", "0.2", "--out", b.string()}).code == 0);
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "final_state.csv") == slurp(b / "final_state.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("modal CSV input")
{
    const fs::path p = scratch("u0.csv");
    std::ofstream(p) << "l,i,value\n1,3,0.5\n2,4,-0.25\n";
    ProblemConfig c;
    Grid g;
    g.Nx = 8;
    g.n_modes = 2;
    const Space s(c, g);
    const ModalField u = cli::read_modal_csv(p.string(), s);
    CHECK(u(0, 3) == 0.5);
    CHECK(u(1, 4) == -0.25);
    std::ofstream(p) << "l,i,value\n3,1,1\n";
    CHECK(testutil::thrown_kind([&] { cli::read_modal_csv(p.string(), s); }) == ErrorKind::Shape);
    fs::remove(p);
}
