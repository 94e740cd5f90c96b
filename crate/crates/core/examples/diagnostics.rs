//! Data that fall outside their declared types are reported, not guessed at.

const MODEL: &str = "\
type: Types
Name | Type | Values
Person | string | Agatha, Butler, Charles

function: Functions
Name | Type
Age of Person | int

data: Ages
Person || Age of Person
Agatha || 80
Butler || 50
Charless || 40
";

pub fn run_example() -> cdmn::Result<String> {
    let model = cdmn::compile_str(MODEL)?;
    Ok(model.diagnostics.iter().map(|d| format!("{d}\n")).collect())
}

fn main() -> cdmn::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
