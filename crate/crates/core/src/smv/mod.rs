//! SMV emission for external cross-validation, with a parser and
//! interpreter for the emitted subset.

mod emit;
mod interp;
mod syntax;

pub use emit::{emit_smv, localize, render_ltl, Artifact, EmitError, Manifest, SmvDocument};
pub use interp::{agreement_with_expansion, Input, InterpError, SmvState, Value};
pub use syntax::{check_syntax, parse_smv, CmpOp, Expr, SmvModule, SmvSyntaxError, Target, VarType};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::{expand, AtBound};
    use crate::logic::BoundProfile;
    use crate::ltl::LtlFormula;
    use crate::model::tests::two_state;
    use crate::model::{Action, ServiceAlphabet, SpsBuilder};

    fn any(prefix: &str, n: usize) -> LtlFormula {
        LtlFormula::any_of((1..=n).map(|j| LtlFormula::atom(format!("{prefix}[{j}]"))))
    }

    fn bounds(n: usize) -> BoundProfile {
        BoundProfile::from_bounds(&ServiceAlphabet::new(["u0"]).unwrap(), &[n])
    }

    #[test]
    fn two_state_matches_hand_transcription() {
        let phi = any("p", 4).implies(any("q", 4).next()).globally();
        let doc = emit_smv(&two_state(None), &bounds(4), &phi).unwrap();
        let golden = include_str!("../../golden/two_state.smv");
        assert_eq!(doc.text, golden);
        assert!(doc.text.contains("VAR ctr: 0..4;"));
        assert_eq!(doc.manifest.at_bound, AtBound::Freeze);
    }

    #[test]
    fn spec_without_next() {
        let phi = any("p", 4).implies(any("q", 4)).globally();
        let doc = emit_smv(&two_state(None), &bounds(4), &phi).unwrap();
        assert!(doc
            .text
            .ends_with("LTLSPEC\n G ((p[1] | p[2] | p[3] | p[4]) -> (q[1] | q[2] | q[3] | q[4]))\n"));
    }

    #[test]
    fn empty_system_gives_minimal_document() {
        let sps = SpsBuilder::new(ServiceAlphabet::new(["u"]).unwrap())
            .state("s")
            .initial("s")
            .build()
            .unwrap();
        let doc = emit_smv(&sps, &BoundProfile::from_bounds(sps.alphabet(), &[0]), &LtlFormula::True.globally()).unwrap();
        assert_eq!(
            doc.text,
            "MODULE main\nIVAR ip : boolean;\nVAR loc : {s};\nASSIGN\n init(loc):=s;\n \
             next(loc):= case\n        TRUE : loc;\n esac;\n\nLTLSPEC\n G (TRUE)\n"
        );
        check_syntax(&doc.text).unwrap();
    }

    #[test]
    fn zero_bound_on_used_type_is_rejected() {
        let err = emit_smv(&two_state(None), &bounds(0), &LtlFormula::True).unwrap_err();
        assert_eq!(err, EmitError::ZeroBound("u0".into()));
    }

    #[test]
    fn emitted_module_parses_and_agrees_with_freeze_expansion() {
        for n in 1..=4 {
            let doc = emit_smv(&two_state(None), &bounds(n), &any("p", n).globally()).unwrap();
            let m = parse_smv(&doc.text).unwrap();
            let k = expand(&two_state(None), &bounds(n), AtBound::Freeze).unwrap();
            assert_eq!(agreement_with_expansion(&m, &k, 100_000).unwrap(), Vec::<String>::new());
        }
    }

    #[test]
    fn multi_type_tau_and_partial_enabling() {
        let sps = SpsBuilder::new(ServiceAlphabet::new(["a", "b"]).unwrap())
            .state("s0")
            .state("s1")
            .state("s2")
            .initial("s0")
            .initial("s2")
            .label("s1", "busy")
            .transition("s0", Action::Req(0), "s1")
            .transition("s0", Action::Req(0), "s2")
            .transition("s1", Action::Ans(0), "s0")
            .transition("s1", Action::Tau, "s2")
            .transition("s2", Action::Req(1), "s2")
            .transition("s2", Action::Ans(1), "s0")
            .transition("s2", Action::Ans(0), "s2")
            .build()
            .unwrap();
        let b = BoundProfile::from_bounds(sps.alphabet(), &[2, 1]);
        let phi = LtlFormula::atom("busy").implies(LtlFormula::atom("q0[1]").finally()).globally();
        let doc = emit_smv(&sps, &b, &phi).unwrap();
        assert!(doc.text.contains("IVAR ip : {tau,req_a,ans_a,req_b,ans_b};"));
        assert!(doc.text.contains("init(loc):={s0,s2};"));
        assert!(doc.text.contains("loc=s0 & ip=req_a : {s1,s2};"));
        assert!(doc.text.contains("ip=ans_a & (loc=s1 | loc=s2) & ctr0>0"));
        assert!(doc.text.contains("G ((loc=s1) -> (F (q0[1])))"));
        let m = parse_smv(&doc.text).unwrap();
        let k = expand(&sps, &b, AtBound::Freeze).unwrap();
        assert_eq!(agreement_with_expansion(&m, &k, 100_000).unwrap(), Vec::<String>::new());
        assert_eq!(emit_smv(&sps, &b, &phi).unwrap(), doc);
    }

    #[test]
    fn array_indices_stay_in_range() {
        let phi = any("p", 6).globally();
        let doc = emit_smv(&two_state(None), &bounds(3), &phi).unwrap();
        check_syntax(&doc.text).unwrap();
        assert!(!doc.text.contains("p[4]"));
    }
}
