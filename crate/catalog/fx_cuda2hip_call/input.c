double draw_one(void *state)
{
    double r = curand_uniform_double(state);
    record(r);
    return r;
}
