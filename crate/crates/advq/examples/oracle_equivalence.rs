//! Build the discrete unitary oracle and the oracle Hamiltonian for a few
//! inputs and check that a π-time evolution of the Hamiltonian reproduces the
//! unitary exactly. A zero Hamiltonian family shows what a genuine model
//! mismatch looks like.

use advq::matrix::CMatrix;
use advq::query::{
    check_oracle_equivalence, discrete_oracle, hamiltonian_oracle, parse_input, OracleSpec,
};

fn main() {
    println!("# oracle equivalence: ||O_x - exp(-i pi H_Q(x))||");
    for (n, alphabet, inputs) in [
        (1usize, 2usize, vec!["0", "1"]),
        (2, 2, vec!["00", "01", "10", "11"]),
        (3, 3, vec!["012", "210", "111"]),
    ] {
        let spec = OracleSpec::standard(n, alphabet);
        for input in inputs {
            let x = parse_input(input, alphabet).unwrap();
            let residual = check_oracle_equivalence(&x, &spec);
            println!("n={n} |Sigma|={alphabet} x={input}: residual {residual:.3e}");
        }
    }

    // involution and unitarity of the discrete oracle
    let x = parse_input("01", 2).unwrap();
    let o = discrete_oracle(&x, 2);
    let dim = o.nrows();
    println!(
        "\nO_x^2 = 1 check: {:.3e}",
        (&o * &o - CMatrix::identity(dim, dim)).norm()
    );

    // spectrum of the standard oracle Hamiltonian is {0, 1}
    let spec = OracleSpec::standard(2, 2);
    let hq = hamiltonian_oracle(&x, &spec);
    let eigenvalues = advq::matrix::hermitian_eigen(&hq).0;
    println!("H_Q spectrum: {:?}", eigenvalues.as_slice());

    // a non-standard family is a different model, and the residual says so
    let zero_family = OracleSpec::with_family(1, 2, vec![CMatrix::zeros(3, 3); 2]).unwrap();
    let x1 = parse_input("1", 2).unwrap();
    println!(
        "\nzero family (expected mismatch): residual {:.3}",
        check_oracle_equivalence(&x1, &zero_family)
    );
}
