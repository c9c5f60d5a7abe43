#include "narfima/serialization.hpp"

#include <fstream>
#include <sstream>

#include "narfima/error.hpp"

namespace narfima {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd eigen_vec(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string mode_name(FutureExogMode m) { return m == FutureExogMode::Required ? "REQUIRED" : "FREEZE_LAST"; }

FutureExogMode mode_from(const std::string& s) {
    if (s == "REQUIRED") return FutureExogMode::Required;
    if (s == "FREEZE_LAST") return FutureExogMode::FreezeLast;
    throw ParseError(0, "unknown future_exog_mode '" + s + "'");
}

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

json to_json(const ArfimaxModel& m) {
    return {{"p", m.spec.p},
            {"q", m.spec.q},
            {"include_exogenous", m.spec.include_exogenous},
            {"d", m.d},
            {"d_estimated", m.d_estimated},
            {"phi", m.phi},
            {"theta", m.theta},
            {"pi", m.pi},
            {"mu", m.mu},
            {"sigma2", m.sigma2},
            {"level", m.level},
            {"exog_center", m.exog_center},
            {"css", m.loglik_proxy},
            {"aic", m.aic},
            {"residuals", m.residuals},
            {"fitted", m.fitted},
            {"history", m.history},
            {"last_exogenous", m.last_exogenous}};
}

ArfimaxModel arfimax_from_json(const json& j) {
    return guarded("ARFIMAx model", [&] {
        ArfimaxModel m;
        m.spec.p = j.at("p").get<std::size_t>();
        m.spec.q = j.at("q").get<std::size_t>();
        m.spec.include_exogenous = j.at("include_exogenous").get<bool>();
        m.d = j.at("d").get<double>();
        m.d_estimated = j.at("d_estimated").get<bool>();
        j.at("phi").get_to(m.phi);
        j.at("theta").get_to(m.theta);
        j.at("pi").get_to(m.pi);
        m.mu = j.at("mu").get<double>();
        m.sigma2 = j.at("sigma2").get<double>();
        m.level = j.at("level").get<double>();
        j.at("exog_center").get_to(m.exog_center);
        m.loglik_proxy = j.at("css").get<double>();
        m.aic = j.at("aic").get<double>();
        j.at("residuals").get_to(m.residuals);
        j.at("fitted").get_to(m.fitted);
        j.at("history").get_to(m.history);
        j.at("last_exogenous").get_to(m.last_exogenous);
        if (m.phi.size() != m.spec.p || m.theta.size() != m.spec.q)
            throw Error("ARFIMAx coefficient lengths do not match (p, q)");
        return m;
    });
}

json to_json(const NetworkWeights& w) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < w.hidden_in.rows(); ++i) rows.push_back(vec(w.hidden_in.row(i).transpose()));
    return {{"k", w.k},
            {"skip", w.skip},
            {"inputs", w.inputs()},
            {"hidden_in", rows},
            {"hidden_bias", vec(w.hidden_bias)},
            {"hidden_out", vec(w.hidden_out)},
            {"skip_weights", vec(w.skip_weights)},
            {"bias", w.bias}};
}

NetworkWeights network_from_json(const json& j) {
    return guarded("network weights", [&] {
        const auto k = j.at("k").get<std::size_t>();
        const auto m = j.at("inputs").get<std::size_t>();
        auto w = NetworkWeights::zeros(m, k, j.at("skip").get<bool>());
        const auto& rows = j.at("hidden_in");
        if (rows.size() != k) throw Error("hidden_in has the wrong number of rows");
        for (std::size_t i = 0; i < k; ++i) {
            const auto r = eigen_vec(rows[i]);
            if (static_cast<std::size_t>(r.size()) != m) throw Error("hidden_in row has the wrong width");
            w.hidden_in.row(static_cast<Eigen::Index>(i)) = r.transpose();
        }
        w.hidden_bias = eigen_vec(j.at("hidden_bias"));
        w.hidden_out = eigen_vec(j.at("hidden_out"));
        w.skip_weights = eigen_vec(j.at("skip_weights"));
        w.bias = j.at("bias").get<double>();
        if (static_cast<std::size_t>(w.hidden_bias.size()) != k ||
            static_cast<std::size_t>(w.hidden_out.size()) != k ||
            static_cast<std::size_t>(w.skip_weights.size()) != m)
            throw Error("network weight vectors have inconsistent lengths");
        return w;
    });
}

json to_json(const FeatureScaler& s) {
    return {{"center", s.center},
            {"scale", s.scale},
            {"target_center", s.target_center},
            {"target_scale", s.target_scale}};
}

FeatureScaler scaler_from_json(const json& j) {
    return guarded("feature scaler", [&] {
        FeatureScaler s;
        j.at("center").get_to(s.center);
        j.at("scale").get_to(s.scale);
        s.target_center = j.at("target_center").get<double>();
        s.target_scale = j.at("target_scale").get<double>();
        if (s.center.size() != s.scale.size()) throw Error("scaler center/scale lengths differ");
        return s;
    });
}

json to_json(const NarfimaPipeline& p) {
    json stage1 = {{"kind", to_string(p.stage1.kind)}, {"residuals", p.stage1.residuals}};
    stage1["linear"] = p.stage1.linear ? to_json(*p.stage1.linear) : json(nullptr);
    return {{"format_version", kFormatVersion},
            {"chosen", {{"p", p.chosen.p}, {"q", p.chosen.q}, {"k", p.chosen.k}, {"skip", p.chosen.skip}}},
            {"stage1", stage1},
            {"network", to_json(p.network)},
            {"scaler", to_json(p.scaler)},
            {"tail_y", p.tail_y},
            {"tail_e", p.tail_e},
            {"last_exogenous", p.last_exogenous},
            {"exogenous_names", p.exogenous_names},
            {"last_timestamp", p.last_timestamp.to_string()},
            {"future_exog_mode", mode_name(p.future_exog_mode)},
            {"in_sample_rmse", p.in_sample_rmse}};
}

NarfimaPipeline pipeline_from_json(const json& j) {
    return guarded("pipeline", [&] {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw Error("unsupported pipeline format version");
        NarfimaPipeline p;
        const auto& c = j.at("chosen");
        p.chosen = {c.at("p").get<std::size_t>(), c.at("q").get<std::size_t>(), c.at("k").get<std::size_t>(),
                    c.at("skip").get<bool>()};
        const auto& s1 = j.at("stage1");
        p.stage1.kind = stage1_from_string(s1.at("kind").get<std::string>());
        s1.at("residuals").get_to(p.stage1.residuals);
        if (!s1.at("linear").is_null()) p.stage1.linear = arfimax_from_json(s1.at("linear"));
        p.network = network_from_json(j.at("network"));
        p.scaler = scaler_from_json(j.at("scaler"));
        j.at("tail_y").get_to(p.tail_y);
        j.at("tail_e").get_to(p.tail_e);
        j.at("last_exogenous").get_to(p.last_exogenous);
        j.at("exogenous_names").get_to(p.exogenous_names);
        p.last_timestamp = YearMonth::parse(j.at("last_timestamp").get<std::string>());
        p.future_exog_mode = mode_from(j.at("future_exog_mode").get<std::string>());
        p.in_sample_rmse = j.at("in_sample_rmse").get<double>();

        const std::size_t inputs = p.chosen.p + p.chosen.q + p.last_exogenous.size();
        if (p.network.inputs() != inputs || p.scaler.center.size() != inputs || p.network.k != p.chosen.k ||
            p.network.skip != p.chosen.skip)
            throw Error("pipeline network does not match the chosen (p, q, k, skip) and covariates");
        if (p.tail_y.size() < p.chosen.p || p.tail_e.size() < p.chosen.q)
            throw Error("pipeline tail is shorter than the lag order");
        return p;
    });
}

void save_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void save_pipeline(const NarfimaPipeline& pipeline, const std::filesystem::path& path) {
    save_json(to_json(pipeline), path);
}

NarfimaPipeline load_pipeline(const std::filesystem::path& path) {
    return pipeline_from_json(load_json(path));
}

}  // namespace narfima
