#include "stockcast/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "stockcast/error.hpp"

namespace stockcast {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = s.find(',', pos);
        auto item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty())
            out.push_back(std::move(item));
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

double to_real(const std::string& v)
{
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
        throw InvalidArgument("expected a number, got '" + v + "'");
    return x;
}

std::uint64_t to_unsigned(const std::string& v)
{
    std::uint64_t x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw InvalidArgument("expected a non-negative integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidArgument("expected true or false, got '" + v + "'");
}

std::string real_text(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"data.paths", [](ExperimentConfig& c, const std::string& v) { c.datasets = split_list(v); }},
        {"data.features", [](ExperimentConfig& c, const std::string& v) { c.features = parse_column_list(v); }},
        {"data.target", [](ExperimentConfig& c, const std::string& v) { c.target = parse_column(v); }},
        {"data.horizon", [](ExperimentConfig& c, const std::string& v) { c.horizon = to_unsigned(v); }},
        {"data.train_fraction", [](ExperimentConfig& c, const std::string& v) { c.train_fraction = to_real(v); }},
        {"data.scaler", [](ExperimentConfig& c, const std::string& v) { c.scaler = v; }},
        {"run.models",
         [](ExperimentConfig& c, const std::string& v) {
             c.models.clear();
             for (const auto& name : split_list(v))
                 c.models.push_back(parse_model_kind(name));
         }},
        {"run.seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_unsigned(v); }},
        {"run.threads", [](ExperimentConfig& c, const std::string& v) { c.threads = to_unsigned(v); }},
        {"run.timing", [](ExperimentConfig& c, const std::string& v) { c.timing = to_bool(v); }},
        {"mlp.hidden", [](ExperimentConfig& c, const std::string& v) { c.mlp.hidden = to_unsigned(v); }},
        {"mlp.epochs", [](ExperimentConfig& c, const std::string& v) { c.mlp.epochs = to_unsigned(v); }},
        {"svm.kernel",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "linear") c.svm.kernel = svm::KernelKind::linear;
             else if (v == "polynomial") c.svm.kernel = svm::KernelKind::polynomial;
             else if (v == "rbf") c.svm.kernel = svm::KernelKind::rbf;
             else throw InvalidArgument("unknown kernel '" + v + "'");
         }},
        {"svm.gamma", [](ExperimentConfig& c, const std::string& v) { c.svm.gamma = to_real(v); }},
        {"svm.degree", [](ExperimentConfig& c, const std::string& v) { c.svm.degree = static_cast<int>(to_unsigned(v)); }},
        {"svm.coef0", [](ExperimentConfig& c, const std::string& v) { c.svm.coef0 = to_real(v); }},
        {"svm.C", [](ExperimentConfig& c, const std::string& v) { c.svm.C = to_real(v); }},
        {"svm.epsilon_tube", [](ExperimentConfig& c, const std::string& v) { c.svm.epsilon_tube = to_real(v); }},
        {"svm.tolerance", [](ExperimentConfig& c, const std::string& v) { c.svm.tolerance = to_real(v); }},
        {"anfis.mfs", [](ExperimentConfig& c, const std::string& v) { c.anfis.mfs = to_unsigned(v); }},
        {"anfis.kind",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "triangular") c.anfis.kind = anfis::MfKind::triangular;
             else if (v == "gaussian") c.anfis.kind = anfis::MfKind::gaussian;
             else throw InvalidArgument("unknown membership function kind '" + v + "'");
         }},
        {"anfis.epochs", [](ExperimentConfig& c, const std::string& v) { c.anfis.epochs = to_unsigned(v); }},
        {"anfis.eta", [](ExperimentConfig& c, const std::string& v) { c.anfis.eta = to_real(v); }},
        {"dbnn.K", [](ExperimentConfig& c, const std::string& v) { c.dbnn.k = to_unsigned(v); }},
        {"dbnn.K_t", [](ExperimentConfig& c, const std::string& v) { c.dbnn.k_t = to_unsigned(v); }},
        {"dbnn.rounds", [](ExperimentConfig& c, const std::string& v) { c.dbnn.rounds = to_unsigned(v); }},
        {"dbnn.learn_rate", [](ExperimentConfig& c, const std::string& v) { c.dbnn.learn_rate = to_real(v); }},
    };
    return table;
}

} // namespace

void ExperimentConfig::validate() const
{
    if (models.empty())
        throw InvalidArgument("config: at least one model is required");
    std::set<ModelKind> seen(models.begin(), models.end());
    if (seen.size() != models.size())
        throw InvalidArgument("config: a model is listed twice");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidArgument("config: data.train_fraction must lie in (0, 1)");
    if (features.empty())
        throw InvalidArgument("config: data.features is empty");
    if (horizon == 0)
        throw InvalidArgument("config: data.horizon must be >= 1");
    if (scaler != "minmax")
        throw InvalidArgument("config: unknown scaler '" + scaler + "'");
    if (threads == 0)
        throw InvalidArgument("config: run.threads must be >= 1");
    if (mlp.hidden == 0)
        throw InvalidArgument("config: mlp.hidden must be >= 1");
    if (anfis.mfs == 0)
        throw InvalidArgument("config: anfis.mfs must be >= 1");
    if (svm.gamma && !(*svm.gamma > 0.0))
        throw InvalidArgument("config: svm.gamma must be > 0");
    if (!(svm.C > 0.0) || !(svm.epsilon_tube >= 0.0) || !(svm.tolerance > 0.0))
        throw InvalidArgument("config: svm.C and svm.tolerance must be > 0, svm.epsilon_tube >= 0");
    if (dbnn.k < 2 || dbnn.k_t < 2)
        throw InvalidArgument("config: dbnn.K and dbnn.K_t must be >= 2");
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto text = trim(line);
        if (text.empty())
            continue;
        const auto where = "config line " + std::to_string(line_no) + ": ";
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(where + "expected key=value");
        const auto key = trim(std::string_view(text).substr(0, eq));
        const auto value = trim(std::string_view(text).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw InvalidArgument(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw InvalidArgument(where + "key '" + key + "' given twice");
        try {
            it->second(cfg, value);
        } catch (const Error& e) {
            throw InvalidArgument(where + key + ": " + e.what());
        }
    }
    for (auto& p : cfg.datasets) {
        std::filesystem::path path(p);
        if (path.is_relative() && !base_dir.empty())
            p = (base_dir / path).lexically_normal().string();
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config file '" + path.string() + "'");
    try {
        return parse_config(in, path.parent_path());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

void write_config(std::ostream& out, const ExperimentConfig& c)
{
    auto join = [](const auto& items, auto&& name) {
        std::string s;
        for (const auto& item : items) {
            if (!s.empty())
                s += ',';
            s += name(item);
        }
        return s;
    };
    out << "data.paths = " << join(c.datasets, [](const std::string& p) { return p; }) << '\n'
        << "data.features = " << join(c.features, [](Column col) { return std::string(column_name(col)); }) << '\n'
        << "data.target = " << column_name(c.target) << '\n'
        << "data.horizon = " << c.horizon << '\n'
        << "data.train_fraction = " << real_text(c.train_fraction) << '\n'
        << "data.scaler = " << c.scaler << '\n'
        << "run.models = " << join(c.models, [](ModelKind k) { return std::string(model_kind_name(k)); }) << '\n'
        << "run.seed = " << c.seed << '\n'
        << "run.threads = " << c.threads << '\n'
        << "run.timing = " << (c.timing ? "true" : "false") << '\n'
        << "mlp.hidden = " << c.mlp.hidden << '\n'
        << "mlp.epochs = " << c.mlp.epochs << '\n';
    const char* kernel = c.svm.kernel == svm::KernelKind::linear       ? "linear"
                         : c.svm.kernel == svm::KernelKind::polynomial ? "polynomial"
                                                                       : "rbf";
    out << "svm.kernel = " << kernel << '\n';
    if (c.svm.gamma)
        out << "svm.gamma = " << real_text(*c.svm.gamma) << '\n';
    out << "svm.degree = " << c.svm.degree << '\n'
        << "svm.coef0 = " << real_text(c.svm.coef0) << '\n'
        << "svm.C = " << real_text(c.svm.C) << '\n'
        << "svm.epsilon_tube = " << real_text(c.svm.epsilon_tube) << '\n'
        << "svm.tolerance = " << real_text(c.svm.tolerance) << '\n'
        << "anfis.mfs = " << c.anfis.mfs << '\n'
        << "anfis.kind = " << (c.anfis.kind == anfis::MfKind::triangular ? "triangular" : "gaussian") << '\n'
        << "anfis.epochs = " << c.anfis.epochs << '\n'
        << "anfis.eta = " << real_text(c.anfis.eta) << '\n'
        << "dbnn.K = " << c.dbnn.k << '\n'
        << "dbnn.K_t = " << c.dbnn.k_t << '\n'
        << "dbnn.rounds = " << c.dbnn.rounds << '\n'
        << "dbnn.learn_rate = " << real_text(c.dbnn.learn_rate) << '\n';
}

} // namespace stockcast
