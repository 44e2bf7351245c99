#include "stockcast/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace stockcast {

std::string_view model_kind_name(ModelKind kind)
{
    switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::svm: return "svm";
    case ModelKind::anfis: return "anfis";
    case ModelKind::dbnn: return "dbnn";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name)
{
    for (auto k : {ModelKind::mlp, ModelKind::svm, ModelKind::anfis, ModelKind::dbnn})
        if (model_kind_name(k) == name)
            return k;
    throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

ModelKind kind_of(const Model& model)
{
    return static_cast<ModelKind>(model.index());
}

std::size_t input_dim(const Model& model)
{
    struct {
        std::size_t operator()(const MlpModel& m) const { return m.input_dim; }
        std::size_t operator()(const svm::SvmModel& m) const { return m.input_dim(); }
        std::size_t operator()(const anfis::AnfisModel& m) const { return m.input_dim; }
        std::size_t operator()(const dbnn::DbnnRegressor& m) const { return m.input_dim(); }
    } visitor;
    return std::visit(visitor, model);
}

double predict(const Model& model, std::span<const double> x)
{
    struct {
        std::span<const double> x;
        double operator()(const MlpModel& m) const { return mlp_forward(m, x); }
        double operator()(const svm::SvmModel& m) const { return svm::svm_predict(m, x); }
        double operator()(const anfis::AnfisModel& m) const { return anfis::anfis_forward(m, x).output; }
        double operator()(const dbnn::DbnnRegressor& m) const { return dbnn::dbnn_regress_predict(m, x); }
    } visitor{x};
    return std::visit(visitor, model);
}

Vector predict(const Model& model, const Matrix& x)
{
    Vector out(x.rows());
    Vector row(x.cols());
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        row = x.row(s).transpose();
        out(s) = predict(model, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    }
    return out;
}

namespace {

// ---- writing -------------------------------------------------------------

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    Writer& key(std::string_view k)
    {
        if (!first_)
            out_ << '\n';
        out_ << k;
        first_ = false;
        return *this;
    }
    Writer& real(double v)
    {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        out_ << ' ';
        out_.write(buf, r.ptr - buf);
        return *this;
    }
    Writer& integer(long long v)
    {
        out_ << ' ' << v;
        return *this;
    }
    Writer& word(std::string_view w)
    {
        out_ << ' ' << w;
        return *this;
    }
    void finish() { out_ << '\n'; }

private:
    std::ostream& out_;
    bool first_ = true;
};

void write_bins(Writer& w, const dbnn::AttributeBins& b)
{
    w.key("attributes").integer(static_cast<long long>(b.attribute_count()));
    for (std::size_t m = 0; m < b.attribute_count(); ++m) {
        w.key("attr").real(b.lo[m]).real(b.hi[m]).integer(b.degenerate[m] ? 1 : 0)
            .integer(static_cast<long long>(b.cuts[m].size()));
        for (double c : b.cuts[m])
            w.real(c);
    }
}

void write_table(Writer& w, std::string_view name, std::size_t index, const Matrix& m)
{
    w.key(name).integer(static_cast<long long>(index)).integer(m.rows()).integer(m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            w.real(m(r, c));
}

void write_body(Writer& w, const MlpModel& m)
{
    w.key("input_dim").integer(static_cast<long long>(m.input_dim));
    w.key("hidden").integer(static_cast<long long>(m.hidden));
    w.key("weights").integer(m.weights.size());
    for (Eigen::Index i = 0; i < m.weights.size(); ++i)
        w.real(m.weights(i));
}

void write_body(Writer& w, const svm::SvmModel& m)
{
    w.key("mode").word(m.mode == svm::Mode::classify ? "classify" : "regress");
    switch (m.kernel.kind) {
    case svm::KernelKind::linear: w.key("kernel").word("linear"); break;
    case svm::KernelKind::polynomial:
        w.key("kernel").word("polynomial").integer(m.kernel.degree).real(m.kernel.coef0);
        break;
    case svm::KernelKind::rbf: w.key("kernel").word("rbf").real(m.kernel.gamma); break;
    }
    w.key("bias").real(m.b);
    w.key("input_dim").integer(m.support_vectors.cols());
    w.key("support_vectors").integer(m.support_vectors.rows());
    for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
        w.key("sv").real(m.coef(i));
        for (Eigen::Index j = 0; j < m.support_vectors.cols(); ++j)
            w.real(m.support_vectors(i, j));
    }
}

void write_body(Writer& w, const anfis::AnfisModel& m)
{
    w.key("input_dim").integer(static_cast<long long>(m.input_dim));
    for (std::size_t i = 0; i < m.input_dim; ++i) {
        w.key("input").integer(static_cast<long long>(i)).integer(static_cast<long long>(m.mfs[i].size()));
        for (const auto& mf : m.mfs[i]) {
            if (const auto* g = std::get_if<anfis::Gaussian>(&mf))
                w.key("mf").word("gaussian").real(g->center).real(g->sigma);
            else {
                const auto& t = std::get<anfis::Triangular>(mf);
                w.key("mf").word("triangular").real(t.left).real(t.peak).real(t.right);
            }
        }
    }
    write_table(w, "consequents", 0, m.consequents);
}

void write_body(Writer& w, const dbnn::DbnnRegressor& m)
{
    w.key("constant").integer(m.constant ? 1 : 0).real(m.constant_value);
    w.key("target_bins");
    write_bins(w, m.target_bins);
    w.key("attribute_bins");
    write_bins(w, m.classifier.bins);
    const auto& c = m.classifier;
    w.key("classes").integer(static_cast<long long>(c.classes.size()));
    for (int k : c.classes)
        w.integer(k);
    w.key("priors").integer(c.priors.size());
    for (Eigen::Index k = 0; k < c.priors.size(); ++k)
        w.real(c.priors(k));
    w.key("tables").integer(static_cast<long long>(c.likelihoods.size()));
    for (std::size_t a = 0; a < c.likelihoods.size(); ++a) {
        write_table(w, "likelihood", a, c.likelihoods[a]);
        write_table(w, "weight", a, c.weights[a]);
    }
}

// ---- reading -------------------------------------------------------------

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Moves to the next non-empty line and checks its keyword.
    void expect(std::string_view k)
    {
        if (!next_line())
            throw FormatError("model file is truncated: expected '" + std::string(k) + "'");
        const auto got = word();
        if (got != k)
            throw FormatError("model file line " + std::to_string(line_no_) + ": expected '" +
                              std::string(k) + "', found '" + got + "'");
    }

    std::string word()
    {
        std::string w;
        if (!(tokens_ >> w))
            throw FormatError("model file line " + std::to_string(line_no_) + ": missing field");
        return w;
    }

    double real()
    {
        const auto w = word();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || ptr != w.data() + w.size())
            throw FormatError("model file line " + std::to_string(line_no_) + ": bad number '" + w + "'");
        return v;
    }

    long long integer()
    {
        const auto w = word();
        long long v = 0;
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || ptr != w.data() + w.size())
            throw FormatError("model file line " + std::to_string(line_no_) + ": bad integer '" + w + "'");
        return v;
    }

    std::size_t count(long long limit = 100'000'000)
    {
        const auto v = integer();
        if (v < 0 || v > limit)
            throw FormatError("model file line " + std::to_string(line_no_) + ": count out of range");
        return static_cast<std::size_t>(v);
    }

    // Keyword of the next line without consuming its fields.
    std::string peek_keyword()
    {
        if (!next_line())
            throw FormatError("model file is truncated");
        pending_ = true;
        std::istringstream probe(line_);
        std::string w;
        probe >> w;
        return w;
    }

    int line() const { return line_no_; }

private:
    bool next_line()
    {
        if (pending_) {
            pending_ = false;
            tokens_.clear();
            tokens_.str(line_);
            return true;
        }
        while (std::getline(in_, line_)) {
            ++line_no_;
            if (!line_.empty() && line_.back() == '\r')
                line_.pop_back();
            if (line_.find_first_not_of(" \t") == std::string::npos)
                continue;
            tokens_.clear();
            tokens_.str(line_);
            return true;
        }
        return false;
    }

    std::istream& in_;
    std::string line_;
    std::istringstream tokens_;
    int line_no_ = 0;
    bool pending_ = false;
};

dbnn::AttributeBins read_bins(Reader& r)
{
    r.expect("attributes");
    const auto n = r.count(1'000'000);
    dbnn::AttributeBins b;
    for (std::size_t m = 0; m < n; ++m) {
        r.expect("attr");
        b.lo.push_back(r.real());
        b.hi.push_back(r.real());
        b.degenerate.push_back(r.integer() != 0);
        const auto nc = r.count(1'000'000);
        std::vector<double> cuts;
        for (std::size_t i = 0; i < nc; ++i)
            cuts.push_back(r.real());
        b.cuts.push_back(std::move(cuts));
    }
    return b;
}

Matrix read_table(Reader& r, std::string_view name, std::size_t index)
{
    r.expect(name);
    if (r.count() != index)
        throw FormatError("model file line " + std::to_string(r.line()) + ": table index mismatch");
    const auto rows = static_cast<Eigen::Index>(r.count(10'000'000));
    const auto cols = static_cast<Eigen::Index>(r.count(10'000'000));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = r.real();
    return m;
}

MlpModel read_mlp(Reader& r)
{
    MlpModel m;
    r.expect("input_dim");
    m.input_dim = r.count();
    r.expect("hidden");
    m.hidden = r.count();
    r.expect("weights");
    const auto p = r.count();
    if (p != m.parameter_count() || m.input_dim == 0 || m.hidden == 0)
        throw FormatError("mlp weight count does not match its architecture");
    m.weights.resize(static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < m.weights.size(); ++i)
        m.weights(i) = r.real();
    return m;
}

svm::SvmModel read_svm(Reader& r)
{
    svm::SvmModel m;
    r.expect("mode");
    const auto mode = r.word();
    if (mode == "classify") m.mode = svm::Mode::classify;
    else if (mode == "regress") m.mode = svm::Mode::regress;
    else throw FormatError("unknown svm mode '" + mode + "'");
    r.expect("kernel");
    const auto kind = r.word();
    if (kind == "linear") m.kernel = svm::Kernel::linear();
    else if (kind == "polynomial") {
        const auto degree = static_cast<int>(r.integer());
        m.kernel = svm::Kernel::polynomial(degree, r.real());
    } else if (kind == "rbf") m.kernel = svm::Kernel::rbf(r.real());
    else throw FormatError("unknown kernel '" + kind + "'");
    r.expect("bias");
    m.b = r.real();
    r.expect("input_dim");
    const auto d = static_cast<Eigen::Index>(r.count());
    r.expect("support_vectors");
    const auto n = static_cast<Eigen::Index>(r.count());
    m.support_vectors.resize(n, d);
    m.coef.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r.expect("sv");
        m.coef(i) = r.real();
        for (Eigen::Index j = 0; j < d; ++j)
            m.support_vectors(i, j) = r.real();
    }
    return m;
}

anfis::AnfisModel read_anfis(Reader& r)
{
    anfis::AnfisModel m;
    r.expect("input_dim");
    m.input_dim = r.count(64);
    m.mfs.resize(m.input_dim);
    for (std::size_t i = 0; i < m.input_dim; ++i) {
        r.expect("input");
        if (r.count() != i)
            throw FormatError("anfis inputs out of order");
        const auto nm = r.count(1000);
        for (std::size_t k = 0; k < nm; ++k) {
            r.expect("mf");
            const auto kind = r.word();
            if (kind == "gaussian") {
                const double c = r.real();
                m.mfs[i].push_back(anfis::Gaussian{c, r.real()});
            } else if (kind == "triangular") {
                const double a = r.real();
                const double b = r.real();
                m.mfs[i].push_back(anfis::Triangular{a, b, r.real()});
            } else {
                throw FormatError("unknown membership function '" + kind + "'");
            }
        }
    }
    m.consequents = read_table(r, "consequents", 0);
    if (static_cast<std::size_t>(m.consequents.rows()) != m.rule_count() ||
        static_cast<std::size_t>(m.consequents.cols()) != m.input_dim + 1)
        throw FormatError("anfis consequent table does not match the rule grid");
    return m;
}

dbnn::DbnnRegressor read_dbnn(Reader& r)
{
    dbnn::DbnnRegressor m;
    r.expect("constant");
    m.constant = r.integer() != 0;
    m.constant_value = r.real();
    r.expect("target_bins");
    m.target_bins = read_bins(r);
    r.expect("attribute_bins");
    m.classifier.bins = read_bins(r);
    auto& c = m.classifier;
    r.expect("classes");
    const auto nc = r.count(1'000'000);
    for (std::size_t k = 0; k < nc; ++k)
        c.classes.push_back(static_cast<int>(r.integer()));
    r.expect("priors");
    const auto np = static_cast<Eigen::Index>(r.count());
    c.priors.resize(np);
    for (Eigen::Index k = 0; k < np; ++k)
        c.priors(k) = r.real();
    r.expect("tables");
    const auto nt = r.count(1'000'000);
    for (std::size_t a = 0; a < nt; ++a) {
        c.likelihoods.push_back(read_table(r, "likelihood", a));
        c.weights.push_back(read_table(r, "weight", a));
    }
    return m;
}

} // namespace

void write_model(std::ostream& out, const ModelFile& file)
{
    Writer w(out);
    w.key("stockcast-model").integer(kModelFormatVersion);
    w.key("kind").word(model_kind_name(kind_of(file.model)));
    if (file.pipeline) {
        const auto& p = *file.pipeline;
        w.key("pipeline").integer(static_cast<long long>(p.features.size()));
        for (Column c : p.features)
            w.word(column_name(c));
        w.key("target").word(column_name(p.target)).integer(static_cast<long long>(p.horizon));
        w.key("scaler").integer(static_cast<long long>(p.scaler.ranges.size()));
        for (const auto& [c, range] : p.scaler.ranges)
            w.key("range").word(column_name(c)).real(range.min).real(range.max);
    }
    w.key("model");
    std::visit([&](const auto& m) { write_body(w, m); }, file.model);
    w.key("end");
    w.finish();
}

ModelFile read_model(std::istream& in)
{
    Reader r(in);
    r.expect("stockcast-model");
    const auto version = r.integer();
    if (version != kModelFormatVersion)
        throw FormatError("unsupported model format version " + std::to_string(version));
    r.expect("kind");
    const auto kind_name = r.word();
    ModelKind kind;
    try {
        kind = parse_model_kind(kind_name);
    } catch (const InvalidArgument&) {
        throw FormatError("model file names unknown model kind '" + kind_name + "'");
    }

    ModelFile file;
    if (r.peek_keyword() == "pipeline") {
        r.expect("pipeline");
        PipelineSpec p;
        const auto nf = r.count(16);
        try {
            for (std::size_t i = 0; i < nf; ++i)
                p.features.push_back(parse_column(r.word()));
            r.expect("target");
            p.target = parse_column(r.word());
            p.horizon = r.count();
            r.expect("scaler");
            const auto nr = r.count(16);
            for (std::size_t i = 0; i < nr; ++i) {
                r.expect("range");
                const Column c = parse_column(r.word());
                const double lo = r.real();
                p.scaler.ranges[c] = ColumnRange{lo, r.real()};
            }
        } catch (const InvalidArgument& e) {
            throw FormatError(std::string("model file pipeline section: ") + e.what());
        }
        file.pipeline = std::move(p);
    }
    r.expect("model");
    switch (kind) {
    case ModelKind::mlp: file.model = read_mlp(r); break;
    case ModelKind::svm: file.model = read_svm(r); break;
    case ModelKind::anfis: file.model = read_anfis(r); break;
    case ModelKind::dbnn: file.model = read_dbnn(r); break;
    }
    r.expect("end");
    return file;
}

void save_model(const std::string& path, const ModelFile& file)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write model file '" + path + "'");
    write_model(out, file);
    if (!out)
        throw Error("failed writing model file '" + path + "'");
}

ModelFile load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open model file '" + path + "'");
    try {
        return read_model(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

} // namespace stockcast
