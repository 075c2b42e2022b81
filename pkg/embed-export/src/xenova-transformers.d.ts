// minimal ambient surface for the optional encoder backend; installs
// without it still type-check and the import stays dynamic
declare module "@xenova/transformers" {
  export function pipeline(
    task: string,
    model?: string,
    options?: Record<string, unknown>
  ): Promise<
    (texts: string[], options?: Record<string, unknown>) => Promise<{
      data: Float32Array;
      dims: number[];
    }>
  >;
}
