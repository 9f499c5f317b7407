//! Bundled example queries over the `tpch-like` catalog.

use serde::Serialize;

use crate::catalog::TPCH_LIKE;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub sql: &'static str,
    pub catalog: &'static str,
}

const fn preset(name: &'static str, description: &'static str, sql: &'static str) -> Preset {
    Preset {
        name,
        description,
        sql,
        catalog: TPCH_LIKE,
    }
}

const PRESETS: &[Preset] = &[
    preset(
        "two-way",
        "Customers joined to their orders",
        "SELECT * FROM customer c, orders o WHERE c.c_custkey = o.o_custkey",
    ),
    preset(
        "q3-shipping-priority",
        "TPC-H Q3 join graph: three relations in a chain",
        "SELECT * FROM customer c, orders o, lineitem l \
         WHERE c.c_mktsegment = 'BUILDING' AND c.c_custkey = o.o_custkey \
         AND l.l_orderkey = o.o_orderkey AND o.o_orderdate < '1995-03-15' \
         AND l.l_shipdate > '1995-03-15'",
    ),
    preset(
        "q10-returned-items",
        "TPC-H Q10 join graph: four relations",
        "SELECT * FROM customer c, orders o, lineitem l, nation n \
         WHERE c.c_custkey = o.o_custkey AND l.l_orderkey = o.o_orderkey \
         AND o.o_orderdate >= '1993-10-01' AND l.l_returnflag = 'R' \
         AND c.c_nationkey = n.n_nationkey",
    ),
    preset(
        "q2-minimum-cost-supplier",
        "TPC-H Q2 outer block: five relations",
        "SELECT * FROM part p, supplier s, partsupp ps, nation n, region r \
         WHERE p.p_partkey = ps.ps_partkey AND s.s_suppkey = ps.ps_suppkey \
         AND p.p_size = 15 AND s.s_nationkey = n.n_nationkey \
         AND n.n_regionkey = r.r_regionkey AND r.r_name = 'EUROPE'",
    ),
    preset(
        "q5-local-supplier",
        "TPC-H Q5 join graph: six relations with a cycle",
        "SELECT * FROM customer c, orders o, lineitem l, supplier s, nation n, region r \
         WHERE c.c_custkey = o.o_custkey AND l.l_orderkey = o.o_orderkey \
         AND l.l_suppkey = s.s_suppkey AND c.c_nationkey = s.s_nationkey \
         AND s.s_nationkey = n.n_nationkey AND n.n_regionkey = r.r_regionkey \
         AND r.r_name = 'ASIA' AND o.o_orderdate >= '1994-01-01'",
    ),
    preset(
        "q9-product-profit",
        "TPC-H Q9 join graph: six relations",
        "SELECT * FROM part p, supplier s, lineitem l, partsupp ps, orders o, nation n \
         WHERE s.s_suppkey = l.l_suppkey AND ps.ps_suppkey = l.l_suppkey \
         AND ps.ps_partkey = l.l_partkey AND p.p_partkey = l.l_partkey \
         AND o.o_orderkey = l.l_orderkey AND s.s_nationkey = n.n_nationkey \
         AND p.p_type = 'PROMO BRUSHED COPPER'",
    ),
    preset(
        "q8-market-share",
        "TPC-H Q8 join graph: eight relations, nation used twice",
        "SELECT * FROM part p, supplier s, lineitem l, orders o, customer c, \
         nation n1, nation n2, region r \
         WHERE p.p_partkey = l.l_partkey AND s.s_suppkey = l.l_suppkey \
         AND l.l_orderkey = o.o_orderkey AND o.o_custkey = c.c_custkey \
         AND c.c_nationkey = n1.n_nationkey AND n1.n_regionkey = r.r_regionkey \
         AND r.r_name = 'AMERICA' AND s.s_nationkey = n2.n_nationkey \
         AND p.p_type = 'ECONOMY ANODIZED STEEL'",
    ),
    preset(
        "cte-urgent-orders",
        "A WITH block planned first; its estimate feeds the outer query",
        "WITH urgent AS (SELECT * FROM orders o WHERE o.o_orderpriority = '1-URGENT') \
         SELECT * FROM customer c, urgent u, lineitem l \
         WHERE c.c_custkey = u.o_custkey AND u.o_orderkey = l.l_orderkey",
    ),
    preset(
        "q3-hinted",
        "Q3 with hints fixing the first join and its method",
        "/*+ Leading(o l) NestLoop(o l) SeqScan(o) */ \
         SELECT * FROM customer c, orders o, lineitem l \
         WHERE c.c_mktsegment = 'BUILDING' AND c.c_custkey = o.o_custkey \
         AND l.l_orderkey = o.o_orderkey AND o.o_orderdate < '1995-03-15' \
         AND l.l_shipdate > '1995-03-15'",
    ),
    preset(
        "snowflake-11",
        "Eleven relations: the largest block planned exhaustively by default",
        "SELECT * FROM lineitem l, orders o, customer c, nation n1, region r1, \
         supplier s, nation n2, region r2, part p, partsupp ps, lineitem l2 \
         WHERE l.l_orderkey = o.o_orderkey AND o.o_custkey = c.c_custkey \
         AND c.c_nationkey = n1.n_nationkey AND n1.n_regionkey = r1.r_regionkey \
         AND l.l_suppkey = s.s_suppkey AND s.s_nationkey = n2.n_nationkey \
         AND n2.n_regionkey = r2.r_regionkey AND l.l_partkey = p.p_partkey \
         AND p.p_partkey = ps.ps_partkey AND l2.l_orderkey = o.o_orderkey \
         AND r1.r_name = 'ASIA' AND p.p_size = 15",
    ),
    preset(
        "snowflake-12",
        "Twelve relations: planned by the genetic optimizer by default",
        "SELECT * FROM lineitem l, orders o, customer c, nation n1, region r1, \
         supplier s, nation n2, region r2, part p, partsupp ps, lineitem l2, supplier s2 \
         WHERE l.l_orderkey = o.o_orderkey AND o.o_custkey = c.c_custkey \
         AND c.c_nationkey = n1.n_nationkey AND n1.n_regionkey = r1.r_regionkey \
         AND l.l_suppkey = s.s_suppkey AND s.s_nationkey = n2.n_nationkey \
         AND n2.n_regionkey = r2.r_regionkey AND l.l_partkey = p.p_partkey \
         AND p.p_partkey = ps.ps_partkey AND ps.ps_suppkey = s2.s_suppkey \
         AND l2.l_orderkey = o.o_orderkey AND r1.r_name = 'ASIA' AND p.p_size = 15",
    ),
    preset(
        "snowflake-14",
        "Fourteen relations",
        "SELECT * FROM lineitem l, orders o, customer c, nation n1, region r1, \
         supplier s, nation n2, region r2, part p, partsupp ps, lineitem l2, supplier s2, \
         nation n3, region r3 \
         WHERE l.l_orderkey = o.o_orderkey AND o.o_custkey = c.c_custkey \
         AND c.c_nationkey = n1.n_nationkey AND n1.n_regionkey = r1.r_regionkey \
         AND l.l_suppkey = s.s_suppkey AND s.s_nationkey = n2.n_nationkey \
         AND n2.n_regionkey = r2.r_regionkey AND l.l_partkey = p.p_partkey \
         AND p.p_partkey = ps.ps_partkey AND ps.ps_suppkey = s2.s_suppkey \
         AND l2.l_orderkey = o.o_orderkey AND s2.s_nationkey = n3.n_nationkey \
         AND n3.n_regionkey = r3.r_regionkey AND r1.r_name = 'ASIA' AND p.p_size = 15",
    ),
];

pub fn presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset_by_name(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
