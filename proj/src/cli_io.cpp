#include "stiffhs/cli_io.hpp"

#include "stiffhs/barriers.hpp"
#include "stiffhs/errors.hpp"
#include "stiffhs/front.hpp"
#include "stiffhs/harness.hpp"
#include "stiffhs/pme.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace stiffhs {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads keys off one JSON object and remembers which were consumed.
class Section {
public:
    Section(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors)
    {
        if (!obj_.is_object())
            errors_.push_back(path_ + " must be an object");
    }

    bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

    std::optional<double> number(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = obj_.at(key);
        if (!v.is_number()) {
            errors_.push_back(where(key) + " must be a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    std::optional<std::string> string(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = obj_.at(key);
        if (!v.is_string()) {
            errors_.push_back(where(key) + " must be a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = obj_.at(key);
        std::vector<double> out;
        if (!v.is_array()) {
            errors_.push_back(where(key) + " must be an array of numbers");
            return std::nullopt;
        }
        for (const auto& e : v) {
            if (!e.is_number()) {
                errors_.push_back(where(key) + " must be an array of numbers");
                return std::nullopt;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::optional<std::vector<std::string>> strings(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = obj_.at(key);
        std::vector<std::string> out;
        if (!v.is_array()) {
            errors_.push_back(where(key) + " must be an array of strings");
            return std::nullopt;
        }
        for (const auto& e : v) {
            if (!e.is_string()) {
                errors_.push_back(where(key) + " must be an array of strings");
                return std::nullopt;
            }
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    std::optional<Section> child(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        return Section(obj_.at(key), where(key), errors_);
    }

    /// Must run after every read: flags the keys nobody asked for.
    void finish() const
    {
        if (!obj_.is_object())
            return;
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!used_.count(it.key()))
                errors_.push_back("unknown key " + where(it.key()));
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> used_;
};

Point read_point(Section& s, const std::string& key, std::vector<std::string>& errors)
{
    Point p{0.0, 0.0};
    if (auto v = s.numbers(key)) {
        if (v->size() != 2)
            errors.push_back(s.where(key) + " must have two entries");
        else
            p = {(*v)[0], (*v)[1]};
    }
    return p;
}

// Integers and floats that compare equal must hash the same.
void normalize_numbers(json& j)
{
    if (j.is_number_integer() || j.is_number_unsigned())
        j = j.get<double>();
    else if (j.is_structured())
        for (auto& v : j)
            normalize_numbers(v);
}

std::string utc_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt_m(double m)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "m%g", m);
    return buf;
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream os(p, std::ios::binary);
    os << text;
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
}

template <class F>
void write_with(const fs::path& p, F&& f)
{
    std::ofstream os(p, std::ios::binary);
    f(os);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
}

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ParsedScenario parse_scenario_text(std::string_view text, std::optional<std::vector<double>> m_override)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    if (m_override)
        root["m_list"] = *m_override;

    std::vector<std::string> errors;
    ParsedScenario out;
    Scenario& sc = out.scenario;
    Section top(root, "", errors);

    if (auto v = top.number("schema_version")) {
        if (*v != kSchemaVersion)
            errors.push_back("schema_version " + g17(*v) + " is not supported (expected " +
                             std::to_string(kSchemaVersion) + ")");
    } else if (!top.has("schema_version")) {
        errors.push_back("schema_version is required");
    }

    if (auto g = top.child("geometry")) {
        const auto kind = g->string("kind").value_or("radial");
        if (kind == "radial")
            sc.geometry.kind = GeometryKind::radial;
        else if (kind == "slab")
            sc.geometry.kind = GeometryKind::slab;
        else if (kind == "box2d")
            sc.geometry.kind = GeometryKind::box2d;
        else
            errors.push_back("geometry.kind must be radial, slab or box2d");
        sc.geometry.dimension =
            static_cast<int>(g->number_or("dimension", sc.geometry.kind == GeometryKind::slab ? 1 : 2));
        sc.geometry.extent = g->number_or("extent", 5.0);
        sc.geometry.dx = g->number_or("dx", 0.02);
        g->finish();
    } else {
        sc.geometry = {GeometryKind::radial, 2, 5.0, 0.02};
    }

    if (auto o = top.child("omega0")) {
        const auto kind = o->string("kind").value_or("ball");
        const Point c = read_point(*o, "center", errors);
        if (kind == "empty") {
            sc.omega0 = InitialRegion::empty();
        } else if (kind == "ball") {
            sc.omega0 = InitialRegion::ball(o->number_or("radius", 1.0), c);
        } else if (kind == "annulus") {
            const double a = o->number_or("inner", 0.5), b = o->number_or("outer", 1.0);
            if (!(b > a) || a < 0.0)
                errors.push_back("omega0 annulus needs 0 <= inner < outer");
            else
                sc.omega0 = InitialRegion::annulus(a, b, c);
        } else if (kind == "mask") {
            sc.omega0.kind = InitialRegion::Kind::mask;
            sc.omega0.rows = o->strings("rows").value_or(std::vector<std::string>{});
            if (sc.omega0.rows.empty())
                errors.push_back("omega0 mask needs rows");
        } else {
            errors.push_back("omega0.kind must be empty, ball, annulus or mask");
        }
        o->finish();
    } else {
        sc.omega0 = InitialRegion::ball(1.0);
    }

    if (auto e = top.child("exterior")) {
        const auto kind = e->string("kind").value_or("zero");
        const Point c = read_point(*e, "center", errors);
        try {
            if (kind == "zero")
                sc.rho0_ext = ExteriorProfile::zero();
            else if (kind == "constant")
                sc.rho0_ext = ExteriorProfile::constant(e->number_or("value", 0.0));
            else if (kind == "plateau")
                sc.rho0_ext = ExteriorProfile::plateau(e->number_or("value", 0.0), e->number_or("flat", 1.0),
                                                       e->number_or("zero_radius", 2.0));
            else if (kind == "band")
                sc.rho0_ext = ExteriorProfile::band(e->number_or("value", 0.0), e->number_or("inner", 1.0),
                                                    e->number_or("outer", 2.0));
            else if (kind == "gaussian")
                sc.rho0_ext = ExteriorProfile::gaussian(e->number_or("amplitude", 0.0), e->number_or("ring", 0.0),
                                                        e->number_or("width", 1.0));
            else
                errors.push_back("exterior.kind must be zero, constant, plateau, band or gaussian");
        } catch (const DomainError& ex) {
            errors.push_back(std::string("exterior: ") + ex.what());
        }
        sc.rho0_ext.center = c;
        e->finish();
    }

    if (auto g = top.child("growth")) {
        const auto law = g->string("law").value_or("linear");
        const double g0 = g->number_or("g0", 1.0), pmax = g->number_or("p_max", 1.0);
        try {
            if (law == "linear")
                sc.growth = GrowthLaw::linear(g0, pmax);
            else if (law == "constant")
                sc.growth = GrowthLaw::constant(g0, pmax);
            else if (law == "off")
                sc.growth = GrowthLaw::off();
            else
                errors.push_back("growth.law must be linear, constant or off");
        } catch (const DomainError& ex) {
            errors.push_back(std::string("growth: ") + ex.what());
        }
        g->finish();
    }

    if (auto m = top.numbers("m_list"))
        sc.m_list = *m;
    sc.horizon = top.number_or("horizon", 1.0);

    if (auto o = top.child("output")) {
        auto every = o->number("every");
        auto times = o->numbers("times");
        if (every && times)
            errors.push_back("output takes either every or times, not both");
        if (times)
            sc.output.times = *times;
        else if (every && *every > 0.0 && sc.horizon >= 0.0)
            sc.output = OutputSchedule::every(*every, sc.horizon);
        else if (every)
            errors.push_back("output.every must be > 0");
        o->finish();
    }
    if (sc.output.times.empty() && sc.horizon >= 0.0)
        sc.output = sc.horizon > 0.0 ? OutputSchedule::every(sc.horizon / 10.0, sc.horizon) : OutputSchedule{{0.0}};

    sc.support_threshold = top.number("support_threshold");
    sc.sigma = top.number("sigma");

    if (auto s = top.child("solver")) {
        sc.solver.cfl_safety = s->number_or("cfl_safety", sc.solver.cfl_safety);
        sc.solver.dt_cap = s->number_or("dt_cap", sc.solver.dt_cap);
        const auto stepping = s->string("stepping").value_or("explicit");
        if (stepping == "semi_implicit")
            errors.push_back("solver.stepping semi_implicit is not implemented");
        else if (stepping != "explicit")
            errors.push_back("solver.stepping must be explicit");
        s->finish();
    }
    if (auto f = top.child("front")) {
        sc.front.dt = f->number_or("dt", sc.front.dt);
        sc.front.grid_points = static_cast<int>(f->number_or("grid_points", sc.front.grid_points));
        f->finish();
    }

    CommandParams& cp = out.params;
    if (auto b = top.child("barriers")) {
        cp.wt_radius = b->number_or("wt_radius", cp.wt_radius);
        cp.wt_horizon = b->number_or("wt_horizon", cp.wt_horizon);
        cp.sub_radius = b->number_or("sub_radius", cp.sub_radius);
        cp.decay_M = b->number_or("decay_M", cp.decay_M);
        cp.decay_m = b->number("decay_m");
        cp.samples = static_cast<int>(b->number_or("samples", cp.samples));
        if (cp.samples < 1)
            errors.push_back("barriers.samples must be >= 1");
        b->finish();
    }
    if (auto c = top.child("contraction")) {
        cp.contraction_scale = c->number_or("scale", cp.contraction_scale);
        if (!(cp.contraction_scale > 0.0 && cp.contraction_scale < 1.0))
            errors.push_back("contraction.scale must lie in (0, 1)");
        c->finish();
    }
    if (auto p = top.child("perimeter")) {
        cp.perimeter_eps = p->number("eps");
        if (cp.perimeter_eps && !(*cp.perimeter_eps > 0.0))
            errors.push_back("perimeter.eps must be > 0");
        p->finish();
    }
    if (auto s = top.child("sweep")) {
        cp.sweep_margin = s->number("margin");
        cp.sweep_eval_time = s->number("eval_time");
        if (cp.sweep_margin && *cp.sweep_margin < 0.0)
            errors.push_back("sweep.margin must be >= 0");
        s->finish();
    }
    top.finish();

    for (auto& f : validate(sc))
        errors.push_back(std::move(f));
    if (!errors.empty())
        throw ConfigError(errors);

    if (sc.omega0.kind == InitialRegion::Kind::mask) {
        // the mask is tied to the cell count, so the box cannot grow
        const double need = sc.truncation_radius();
        if (std::isfinite(need) && need > sc.geometry.extent)
            out.warnings.push_back("mask scenario is below the truncation bound " + g17(need) + "; not expanded");
    } else if (auto w = enforce_truncation(sc)) {
        out.warnings.push_back(*w);
    }

    normalize_numbers(root);
    out.canonical = root.dump();
    out.hash = sha256_hex(out.canonical);
    return out;
}

ParsedScenario parse_scenario(const fs::path& path, std::optional<std::vector<double>> m_list)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError({"cannot read config " + path.string()});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), std::move(m_list));
}

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string file_sha256(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::string RunManifest::to_json() const
{
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["scenario_hash"] = scenario_hash;
    j["started"] = started;
    j["finished"] = finished;
    j["warnings"] = warnings;
    ordered_json files_j = ordered_json::array();
    for (const auto& f : files)
        files_j.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    j["files"] = std::move(files_j);
    return j.dump(2) + "\n";
}

std::vector<ManifestEntry> RunManifest::inventory(const fs::path& dir)
{
    std::vector<ManifestEntry> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.json")
            continue;
        out.push_back({e.path().filename().string(), e.file_size(), file_sha256(e.path())});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"pme-run", "front-run", "sweep", "barriers", "contraction", "perimeter"};
    return c;
}

fs::path run_directory(const fs::path& out_root, const ParsedScenario& parsed, const std::string& command)
{
    return out_root / (parsed.hash.substr(0, 16) + "_" + command);
}

namespace {

void cmd_pme_run(const ParsedScenario& ps, const fs::path& dir, std::vector<std::string>& warnings)
{
    const Scenario& sc = ps.scenario;
    for (const double m : sc.m_list) {
        const auto tr = run(sc, m);
        for (const auto& w : tr.warnings)
            warnings.push_back(fmt_m(m) + ": " + w);
        write_with(dir / ("snapshots_" + fmt_m(m) + ".csv"), [&](std::ostream& os) { write_snapshot_csv(os, tr); });
        write_with(dir / ("diagnostics_" + fmt_m(m) + ".csv"), [&](std::ostream& os) { write_diagnostics_csv(os, tr); });
    }
}

void cmd_front_run(const ParsedScenario& ps, const fs::path& dir, std::vector<std::string>&)
{
    const Scenario& sc = ps.scenario;
    if (sc.geometry.kind != GeometryKind::radial)
        throw Unsupported("front-run needs a radial scenario");
    const auto tr = run_front(sc);
    write_with(dir / "front.csv", [&](std::ostream& os) { write_front_csv(os, tr); });
}

void cmd_sweep(const ParsedScenario& ps, const fs::path& dir, const DispatchOptions& opt,
               std::vector<std::string>& warnings)
{
    SweepOptions so;
    so.threads = opt.threads;
    so.scenario_hash = ps.hash;
    so.margin = ps.params.sweep_margin;
    so.eval_time = ps.params.sweep_eval_time;
    const auto rep = m_sweep(ps.scenario, so);
    for (const auto& n : rep.notes)
        warnings.push_back(n);
    write_file(dir / "sweep_report.json", rep.to_json() + "\n");
    write_with(dir / "errors.csv", [&](std::ostream& os) { rep.write_csv(os); });
}

void cmd_barriers(const ParsedScenario& ps, const fs::path& dir, std::vector<std::string>& warnings)
{
    const Scenario& sc = ps.scenario;
    const CommandParams& cp = ps.params;
    const int n = sc.geometry.dimension;
    const double g0 = sc.growth(0.0);
    const int N = cp.samples;

    ordered_json j;
    j["scenario_hash"] = ps.hash;
    j["samples"] = N;

    const auto wt = make_WT(cp.wt_radius, cp.wt_horizon, n, g0);
    const auto id = check_WT_identities(wt, N);
    j["wt_identities"] = {{"laplacian_error", id.laplacian_error},
                          {"ratio_error", id.ratio_error},
                          {"samples", id.samples},
                          {"pass", id.laplacian_error <= 1e-9 && id.ratio_error <= 1e-9}};

    std::vector<BarrierReport> reports;
    reports.push_back(verify_barrier(wt, BarrierRole::super, N));
    if (sc.growth.strictly_decreasing()) {
        reports.push_back(verify_barrier(make_expanding_subbarrier(cp.sub_radius, {0.0, 0.0, 0.0}, sc.growth, n),
                                         BarrierRole::sub, N));
        const double dm = cp.decay_m.value_or(sc.m_list.back());
        reports.push_back(verify_barrier(make_decay_supersolution(dm, cp.decay_M, sc.growth, std::min(sc.horizon, 1.0)),
                                         BarrierRole::super, N));
    } else {
        warnings.push_back("growth law is not strictly decreasing: subbarrier and decay checks skipped");
    }
    ordered_json arr = ordered_json::array();
    bool all = j["wt_identities"]["pass"].get<bool>();
    for (const auto& r : reports) {
        arr.push_back(ordered_json::parse(r.to_json()));
        all = all && r.pass;
    }
    j["barriers"] = std::move(arr);

    // wrong-role control: W_T is a superbarrier, so it must fail as a sub
    const auto neg = verify_barrier(wt, BarrierRole::sub, N);
    j["negative_control"] = ordered_json::parse(neg.to_json());
    j["negative_control_rejected"] = !neg.pass;
    j["all_pass"] = all && !neg.pass;
    if (!all)
        warnings.push_back("a barrier failed verification");
    write_file(dir / "barrier_report.json", j.dump(2) + "\n");
}

void cmd_contraction(const ParsedScenario& ps, const fs::path& dir, std::vector<std::string>& warnings)
{
    const Scenario& sc = ps.scenario;
    const auto cfg = SolverConfig::from(sc.solver);
    const RunOptions opt{sc.epsilon_support(), sc.sup_radius()};
    ordered_json summary = ordered_json::array();
    std::ostringstream csv;
    csv << "m,t,ratio\n";
    for (const double m : sc.m_list) {
        auto a = initial_state(sc, m);
        auto b = a;
        for (auto& v : b.rho)
            v *= ps.params.contraction_scale;
        b.refresh_window();
        const auto runs = run_lockstep({a, b}, sc.output.times, cfg, opt);
        const auto series = l1_contraction_check(runs[0], runs[1]);
        const auto cmp = comparison_check(runs[1], runs[0]);
        for (std::size_t k = 0; k < series.t.size(); ++k)
            csv << g17(m) << ',' << g17(series.t[k]) << ',' << g17(series.ratio[k]) << '\n';
        summary.push_back({{"m", m},
                           {"max_ratio", series.max_ratio},
                           {"flagged", series.flagged},
                           {"ordering_preserved", cmp.holds},
                           {"worst_violation", cmp.worst_violation}});
        if (series.flagged)
            warnings.push_back(fmt_m(m) + ": contraction ratio above 1.01");
        if (!cmp.holds)
            warnings.push_back(fmt_m(m) + ": ordering of the perturbed pair was not preserved");
    }
    write_file(dir / "contraction.csv", csv.str());
    ordered_json j;
    j["scenario_hash"] = ps.hash;
    j["scale"] = ps.params.contraction_scale;
    j["runs"] = std::move(summary);
    write_file(dir / "contraction.json", j.dump(2) + "\n");
}

void cmd_perimeter(const ParsedScenario& ps, const fs::path& dir, std::vector<std::string>& warnings)
{
    const Scenario& sc = ps.scenario;
    if (sc.geometry.kind == GeometryKind::slab)
        throw Unsupported("perimeter needs a radial or box2d scenario");
    const double eps = ps.params.perimeter_eps.value_or(sc.epsilon_support());
    std::ostringstream csv;
    csv << "m,t,perimeter,band_area\n";
    ordered_json runs = ordered_json::array();
    for (const double m : sc.m_list) {
        const auto tr = run(sc, m);
        for (const auto& w : tr.warnings)
            warnings.push_back(fmt_m(m) + ": " + w);
        const auto s = perimeter_series(tr, eps);
        for (std::size_t k = 0; k < s.t.size(); ++k)
            csv << g17(m) << ',' << g17(s.t[k]) << ',' << g17(s.perimeter[k]) << ',' << g17(s.band_area[k]) << '\n';
        runs.push_back({{"m", m}, {"band_measure", s.band_measure}});
    }
    write_file(dir / "perimeter.csv", csv.str());
    ordered_json j;
    j["scenario_hash"] = ps.hash;
    j["eps"] = eps;
    j["runs"] = std::move(runs);
    write_file(dir / "perimeter.json", j.dump(2) + "\n");
}

} // namespace

int dispatch(const std::string& command, const ParsedScenario& parsed, const fs::path& out_root,
             const DispatchOptions& options, std::ostream& log)
{
    if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
        log << "error: unknown command " << command << "\n";
        return kExitValidation;
    }
    const fs::path dir = run_directory(out_root, parsed, command);
    RunManifest man;
    man.command = command;
    man.scenario_hash = parsed.hash;
    man.started = utc_now();
    man.warnings = parsed.warnings;
    int code = kExitOk;
    try {
        fs::remove_all(dir);
        fs::create_directories(dir);
        write_file(dir / "config.canonical.json", parsed.canonical + "\n");
        if (command == "pme-run")
            cmd_pme_run(parsed, dir, man.warnings);
        else if (command == "front-run")
            cmd_front_run(parsed, dir, man.warnings);
        else if (command == "sweep")
            cmd_sweep(parsed, dir, options, man.warnings);
        else if (command == "barriers")
            cmd_barriers(parsed, dir, man.warnings);
        else if (command == "contraction")
            cmd_contraction(parsed, dir, man.warnings);
        else
            cmd_perimeter(parsed, dir, man.warnings);
        man.finished = utc_now();
        man.files = RunManifest::inventory(dir);
        write_file(dir / "manifest.json", man.to_json());
    } catch (const ConfigError& e) {
        log << "validation error:\n";
        for (const auto& f : e.failures())
            log << "  " << f << "\n";
        code = kExitValidation;
    } catch (const DomainError& e) {
        log << "validation error: " << e.what() << "\n";
        code = kExitValidation;
    } catch (const Unsupported& e) {
        log << "validation error: " << e.what() << "\n";
        code = kExitValidation;
    } catch (const NumericalFailure& e) {
        log << "numerical failure: " << e.what() << "\n" << e.state_dump() << "\n";
        code = kExitNumerical;
    } catch (const SolverError& e) {
        log << "solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
        code = kExitNumerical;
    } catch (const std::exception& e) {
        log << "failure: " << e.what() << "\n";
        code = kExitNumerical;
    }
    if (code != kExitOk) {
        std::error_code ec;
        fs::remove_all(dir, ec);
        return code;
    }
    for (const auto& w : man.warnings)
        log << "warning: " << w << "\n";
    log << "wrote " << dir.string() << "\n";
    return kExitOk;
}

} // namespace stiffhs
