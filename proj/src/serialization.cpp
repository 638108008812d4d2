#include "magtrace/serialization.hpp"

#include "magtrace/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

namespace magtrace {

namespace {

Json read_json_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (Json::parse_error const& e) {
        throw DomainError(path + ": " + e.what());
    }
}

double number_field(Json const& obj, char const* key, double fallback)
{
    if (!obj.contains(key)) return fallback;
    auto const& v = obj.at(key);
    if (!v.is_number()) {
        throw DomainError(std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // keep it a JSON float so a reparse stays a double
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void dump_into(std::string& out, Json const& v)
{
    switch (v.type()) {
    case Json::value_t::object: {
        out += '{';
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) { // std::map keeps keys sorted
            if (!first) out += ',';
            first = false;
            out += Json(it.key()).dump();
            out += ':';
            dump_into(out, it.value());
        }
        out += '}';
        break;
    }
    case Json::value_t::array: {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) out += ',';
            dump_into(out, v[i]);
        }
        out += ']';
        break;
    }
    case Json::value_t::number_float: {
        double const d = v.get<double>();
        out += std::isfinite(d) ? format_double(d) : "null";
        break;
    }
    default:
        out += v.dump();
    }
}

} // namespace

CoefficientOperator operator_from_json(Json const& doc)
{
    if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_array()) {
        throw DomainError("operator file needs an \"entries\" array");
    }
    CoefficientOperator::EntryMap entries;
    std::set<CoefficientOperator::Key> seen;
    for (auto const& e : doc.at("entries")) {
        if (!e.is_object() || !e.contains("j") || !e.contains("k") || !e.at("j").is_number_integer()
            || !e.at("k").is_number_integer()) {
            throw DomainError("operator entries need integer \"j\" and \"k\"");
        }
        int const j = e.at("j").get<int>();
        int const k = e.at("k").get<int>();
        if (j < 0 || k < 0) {
            throw DomainError("Landau indices j, k must be non-negative");
        }
        if (!seen.insert({j, k}).second) {
            throw DomainError("duplicate entry (" + std::to_string(j) + ", " + std::to_string(k) + ")");
        }
        Complex const c{number_field(e, "re", 0.0), number_field(e, "im", 0.0)};
        if (c != Complex{}) entries[{j, k}] = c;
    }
    OperatorClass cls = OperatorClass::Unclassified;
    if (doc.contains("class")) {
        if (!doc.at("class").is_string()) {
            throw DomainError("\"class\" must be a string");
        }
        cls = operator_class_from_string(doc.at("class").get<std::string>());
    }
    return CoefficientOperator(std::move(entries), cls);
}

Json operator_to_json(CoefficientOperator const& a)
{
    Json entries = Json::array();
    for (auto const& [key, c] : a.entries()) {
        entries.push_back({{"j", key.first}, {"k", key.second}, {"re", c.real()}, {"im", c.imag()}});
    }
    Json doc = {{"entries", entries}};
    if (a.declared_class() != OperatorClass::Unclassified) {
        doc["class"] = to_string(a.declared_class());
    }
    return doc;
}

CoefficientOperator load_operator(std::string const& path)
{
    return operator_from_json(read_json_file(path));
}

CompactTestFunction test_function_from_json(Json const& doc)
{
    if (!doc.is_object() || !doc.contains("nodes") || !doc.at("nodes").is_array()) {
        throw DomainError("test function file needs a \"nodes\" array");
    }
    std::vector<std::pair<double, double>> nodes;
    for (auto const& n : doc.at("nodes")) {
        if (!n.is_array() || n.size() != 2 || !n[0].is_number() || !n[1].is_number()) {
            throw DomainError("each node must be [eps, value]");
        }
        nodes.emplace_back(n[0].get<double>(), n[1].get<double>());
    }
    return CompactTestFunction(std::move(nodes));
}

CompactTestFunction load_test_function(std::string const& path)
{
    return test_function_from_json(read_json_file(path));
}

std::string canonical_dump(Json const& doc)
{
    std::string out;
    dump_into(out, doc);
    return out;
}

Json complex_to_json(Complex z)
{
    return Json::array({z.real(), z.imag()});
}

Json table_to_json(ConvergenceTable const& table)
{
    Json rows = Json::array();
    for (auto const& row : table.rows) {
        Json r = {{"param", row.param}, {"raw", complex_to_json(row.raw)}};
        r["accelerated"] = row.accelerated ? complex_to_json(*row.accelerated) : Json(nullptr);
        rows.push_back(std::move(r));
    }
    return {{"rows", rows},
            {"extrapolated", complex_to_json(table.extrapolated)},
            {"residual", table.residual},
            {"model", to_string(table.model)},
            {"converged", table.converged}};
}

void write_table_csv(std::ostream& out, ConvergenceTable const& table)
{
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); };
    out << "param,raw_re,raw_im,accelerated_re,accelerated_im,extrapolated_re,extrapolated_im,residual\n";
    for (auto const& row : table.rows) {
        out << num(row.param) << ',' << num(row.raw.real()) << ',' << num(row.raw.imag()) << ',';
        if (row.accelerated) {
            out << num(row.accelerated->real()) << ',' << num(row.accelerated->imag());
        } else {
            out << ',';
        }
        out << ',' << num(table.extrapolated.real()) << ',' << num(table.extrapolated.imag()) << ','
            << num(table.residual) << '\n';
    }
}

void write_grid_csv(std::ostream& out, GridFunction const& f)
{
    out << "x1,x2,re,im\n";
    int const n = f.grid().nodes;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            auto const p = f.point(i, j);
            auto const v = f.at(i, j);
            out << format_double(p.x1) << ',' << format_double(p.x2) << ',' << format_double(v.real()) << ','
                << format_double(v.imag()) << '\n';
        }
    }
}

} // namespace magtrace
