#include "molstore/chipmodel.hpp"

#include <cmath>

#include "molstore/error.hpp"

namespace molstore::chip {

namespace {

Error param(const std::string& what) { return Error(ErrorCategory::Parameter, what); }

} // namespace

void ChipLayout::validate() const
{
    if (!(parking_area_cm2 >= 0 && station_area_cm2 >= 0 && plumbing_area_cm2 >= 0))
        throw Error(ErrorCategory::Config, "chip areas must be >= 0");
    if (!(parking_spots >= 0 && stations >= 0)) throw Error(ErrorCategory::Config, "chip counts must be >= 0");
    if (!(layer_thickness_um > 0)) throw Error(ErrorCategory::Config, "layer_thickness_um must be > 0");
    if (!(block_bytes >= 1)) throw Error(ErrorCategory::Config, "block_bytes must be >= 1");
}

ChipLayout with_parking_spots(const ChipLayout& layout, double spots)
{
    ChipLayout out = layout;
    if (layout.parking_spots > 0) out.parking_area_cm2 = layout.parking_area_cm2 * spots / layout.parking_spots;
    out.parking_spots = spots;
    return out;
}

AreaBudget area_budget(const ChipLayout& l, double die_area_cm2)
{
    AreaBudget b{l.parking_area_cm2, l.station_area_cm2, l.plumbing_area_cm2, 0.0, false};
    b.total_cm2 = b.parking_cm2 + b.stations_cm2 + b.plumbing_cm2;
    b.over_budget = b.total_cm2 > die_area_cm2;
    return b;
}

double areal_capacity(const ChipLayout& l)
{
    const double area = area_budget(l).total_cm2;
    if (!(area > 0)) throw param("areal capacity needs a positive total area");
    return l.parking_spots * l.block_bytes / area;
}

double volumetric_capacity(const ChipLayout& l)
{
    if (!(l.layer_thickness_um > 0)) throw param("layer_thickness_um must be > 0");
    return areal_capacity(l) * (1e4 / l.layer_thickness_um);
}

double station_rate(double bits_per_molecule, double translocation_us)
{
    if (!(translocation_us > 0)) throw param("translocation time must be > 0");
    return bits_per_molecule * 1e6 / translocation_us;
}

double aggregate_rate(double station_bits_per_s, double n_stations) { return station_bits_per_s * n_stations; }

double dvd_stack_height(double bytes, const DvdPlatter& platter)
{
    if (!(platter.bytes > 0)) throw param("DVD capacity must be > 0");
    return std::ceil(bytes / platter.bytes) * platter.thickness_mm * 1e-3;
}

double transit_time(double distance_cm, double voltage_V, double mobility)
{
    if (!(distance_cm > 0 && voltage_V > 0 && mobility > 0))
        throw param("transit time needs positive distance, voltage and mobility");
    return distance_cm * distance_cm / (mobility * voltage_V);
}

Scenario Scenario::from_kv(const kv::KeyValues& kvs) { return from_kv(kvs, Scenario{}); }

Scenario Scenario::from_kv(const kv::KeyValues& kvs, Scenario s)
{
    auto num = [&](const char* key, double& field) {
        if (kvs.contains(key)) field = kvs.get_double(key);
    };
    num("parking_spots", s.layout.parking_spots);
    num("parking_area_cm2", s.layout.parking_area_cm2);
    num("stations", s.layout.stations);
    num("station_area_cm2", s.layout.station_area_cm2);
    num("plumbing_area_cm2", s.layout.plumbing_area_cm2);
    num("layer_thickness_um", s.layout.layer_thickness_um);
    num("block_bytes", s.layout.block_bytes);
    num("die_area_cm2", s.die_area_cm2);
    num("bits_per_molecule", s.bits_per_molecule);
    num("translocation_us", s.translocation_us);
    num("stored_bytes", s.stored_bytes);
    num("dvd_bytes", s.dvd.bytes);
    num("dvd_thickness_mm", s.dvd.thickness_mm);
    num("transit_distance_cm", s.transit_distance_cm);
    num("transit_voltage_V", s.transit_voltage_V);
    num("mobility_cm2_per_Vs", s.mobility_cm2_per_Vs);
    s.layout.validate();
    return s;
}

kv::KeyValues Scenario::to_kv() const
{
    using kv::format_double;
    kv::KeyValues out;
    out.set("parking_spots", format_double(layout.parking_spots));
    out.set("parking_area_cm2", format_double(layout.parking_area_cm2));
    out.set("stations", format_double(layout.stations));
    out.set("station_area_cm2", format_double(layout.station_area_cm2));
    out.set("plumbing_area_cm2", format_double(layout.plumbing_area_cm2));
    out.set("layer_thickness_um", format_double(layout.layer_thickness_um));
    out.set("block_bytes", format_double(layout.block_bytes));
    out.set("die_area_cm2", format_double(die_area_cm2));
    out.set("bits_per_molecule", format_double(bits_per_molecule));
    out.set("translocation_us", format_double(translocation_us));
    out.set("stored_bytes", format_double(stored_bytes));
    out.set("dvd_bytes", format_double(dvd.bytes));
    out.set("dvd_thickness_mm", format_double(dvd.thickness_mm));
    out.set("transit_distance_cm", format_double(transit_distance_cm));
    out.set("transit_voltage_V", format_double(transit_voltage_V));
    out.set("mobility_cm2_per_Vs", format_double(mobility_cm2_per_Vs));
    return out;
}

ThroughputReport plan(const Scenario& s)
{
    s.layout.validate();
    ThroughputReport r;
    r.area = area_budget(s.layout, s.die_area_cm2);
    r.per_station_bits_per_s = station_rate(s.bits_per_molecule, s.translocation_us);
    r.aggregate_bits_per_s = aggregate_rate(r.per_station_bits_per_s, s.layout.stations);
    r.areal_bytes_per_cm2 = areal_capacity(s.layout);
    r.volumetric_bytes_per_cm3 = volumetric_capacity(s.layout);
    r.dvd_stack_m = dvd_stack_height(s.stored_bytes, s.dvd);
    r.transit_time_s = transit_time(s.transit_distance_cm, s.transit_voltage_V, s.mobility_cm2_per_Vs);
    return r;
}

kv::KeyValues ThroughputReport::to_kv() const
{
    using kv::format_double;
    kv::KeyValues out;
    out.set("area_parking_cm2", format_double(area.parking_cm2));
    out.set("area_stations_cm2", format_double(area.stations_cm2));
    out.set("area_plumbing_cm2", format_double(area.plumbing_cm2));
    out.set("area_total_cm2", format_double(area.total_cm2));
    out.set("area_over_budget", area.over_budget ? "1" : "0");
    out.set("per_station_bits_per_s", format_double(per_station_bits_per_s));
    out.set("aggregate_bits_per_s", format_double(aggregate_bits_per_s));
    out.set("areal_bytes_per_cm2", format_double(areal_bytes_per_cm2));
    out.set("volumetric_bytes_per_cm3", format_double(volumetric_bytes_per_cm3));
    out.set("dvd_stack_m", format_double(dvd_stack_m));
    out.set("transit_time_s", format_double(transit_time_s));
    return out;
}

std::string ThroughputReport::csv_header()
{
    return "area_total_cm2,area_over_budget,per_station_bits_per_s,aggregate_bits_per_s,"
           "areal_bytes_per_cm2,volumetric_bytes_per_cm3,dvd_stack_m,transit_time_s";
}

std::string ThroughputReport::csv_row() const
{
    using kv::format_double;
    return format_double(area.total_cm2) + ',' + (area.over_budget ? "1" : "0") + ',' +
           format_double(per_station_bits_per_s) + ',' + format_double(aggregate_bits_per_s) + ',' +
           format_double(areal_bytes_per_cm2) + ',' + format_double(volumetric_bytes_per_cm3) + ',' +
           format_double(dvd_stack_m) + ',' + format_double(transit_time_s);
}

} // namespace molstore::chip
