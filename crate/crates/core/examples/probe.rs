use hamiltonian_noether::expr::*;
use hamiltonian_noether::parser::*;
fn dump(e: &Expr, d: usize) {
    let pad = " ".repeat(d * 2);
    match e.node() {
        Node::Sum(o) => { println!("{pad}Sum"); o.iter().for_each(|x| dump(x, d+1)); }
        Node::Product(o) => { println!("{pad}Product"); o.iter().for_each(|x| dump(x, d+1)); }
        Node::Power(b, r) => { println!("{pad}Power {r}"); dump(b, d+1); }
        other => println!("{pad}{other:?}"),
    }
}
fn main() {
    let e = Expr::t() + Expr::pow(Expr::zero(), Rational::from_integer((-1).into()));
    dump(&e, 0);
    let b = parse_expression("t + 1/0", &ParseContext::phase_space(1)).unwrap();
    dump(&b, 0);
}
